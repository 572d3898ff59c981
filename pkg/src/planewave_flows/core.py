"""Physical parameters, vector helpers and the error hierarchy.

The buoyancy variable is ``b = -g (rho - rho_bar(z)) / rho0``.  Gravity ``g``
and the density field ``rho`` only enter through that definition, so they
are not stored on :class:`ModelParams`; every formula in this package is
written directly in terms of ``b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

# |a.k| <= ORTHO_TOL * |a| |k| counts as orthogonal
ORTHO_TOL = 1e-12
# relative tolerance for |k| == lambda and subspace membership
LENGTH_TOL = 1e-10


class FlowError(Exception):
    """Base class for every error raised by this package."""


class StructuralError(FlowError, ValueError):
    """Inputs are malformed: mismatched dimensions, rank deficiency, bad arguments."""


class ConstraintError(FlowError, ValueError):
    """Inputs are well formed but violate a family constraint."""


class WavelengthMismatchError(ConstraintError):
    pass


class SubspaceError(ConstraintError):
    pass


class IncompatibleForcingError(ConstraintError):
    """Forcing and initial condition jointly violate the family constraints."""


class RegimeError(FlowError, ValueError):
    """The requested construction does not exist for these physical parameters."""


class EvanescentError(RegimeError):
    pass


class UnsupportedShapeError(FlowError, TypeError):
    pass


class IncompatibleSuperpositionError(ConstraintError):
    """Cross advective terms of two fields can not be absorbed by the pressure.

    ``pair`` holds the indices of the offending fields, ``witness`` the
    ``(t, x)`` sample with the largest offending cross term.
    """

    def __init__(self, message: str, pair: tuple[int, int], witness: dict[str, Any]):
        super().__init__(message)
        self.pair = pair
        self.witness = witness


@dataclass(frozen=True)
class ModelParams:
    """Physical constants shared by all flow families.

    ``nu`` and ``mu`` are viscosity and buoyancy diffusivity, ``f`` the
    Coriolis parameter, ``rho0`` the reference density and ``strat`` the
    constant background gradient d(rho_bar)/dz (negative is stable).
    """

    dim: int = 3
    nu: float = 0.0
    mu: float = 0.0
    f: float = 0.0
    rho0: float = 1.0
    strat: float = 0.0

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise StructuralError(f"dim must be an integer >= 2, got {self.dim}")
        if self.nu < 0 or self.mu < 0:
            raise StructuralError("nu and mu must be non-negative")
        if not self.rho0 > 0:
            raise StructuralError("rho0 must be positive")
        if self.f != 0 and self.dim != 3:
            raise StructuralError("a Coriolis parameter needs dim == 3")

    @property
    def inviscid(self) -> bool:
        return self.nu == 0 and self.mu == 0


def as_vector(v: Sequence[float] | np.ndarray, dim: int | None = None, name: str = "vector") -> np.ndarray:
    arr = np.array(v, dtype=float)
    if arr.ndim != 1:
        raise StructuralError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise StructuralError(f"{name} has length {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise StructuralError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def is_orthogonal(a: np.ndarray, k: np.ndarray, tol: float = ORTHO_TOL) -> bool:
    return abs(float(np.dot(a, k))) <= tol * np.linalg.norm(a) * np.linalg.norm(k)


def cross3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.array([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])


E3 = as_vector([0.0, 0.0, 1.0])


def orthonormal_complement_basis(vectors: Sequence[Sequence[float]], dim: int | None = None) -> list[np.ndarray]:
    """Orthonormal basis of the orthogonal complement of ``span(vectors)``.

    Parameters
    ----------
    vectors : sequence of vectors
        Linearly independent, fewer than the space dimension.
    dim : int, optional
        Space dimension; inferred from the vectors when omitted.

    Returns
    -------
    list of ndarray
        ``dim - len(vectors)`` orthonormal vectors.

    Raises
    ------
    StructuralError
        If the vectors are linearly dependent or already span the space.
    """
    vecs = [np.asarray(v, dtype=float) for v in vectors]
    if dim is None:
        if not vecs:
            raise StructuralError("dim is required when no vectors are given")
        dim = vecs[0].shape[0]
    if any(v.shape != (dim,) for v in vecs):
        raise StructuralError("all vectors must have the same dimension")
    if len(vecs) >= dim:
        raise StructuralError(f"{len(vecs)} vectors leave no complement in R^{dim}")
    if not vecs:
        return [np.eye(dim)[i] for i in range(dim)]
    mat = np.vstack(vecs)
    # full SVD: trailing right singular vectors span the null space of mat
    _, s, vt = np.linalg.svd(mat)
    if s[-1] <= 1e-12 * s[0]:
        raise StructuralError("input vectors are linearly dependent")
    return [vt[i].copy() for i in range(len(vecs), dim)]


def orthonormal_pair(e1: Sequence[float], e2: Sequence[float], max_condition: float = 1e8) -> tuple[np.ndarray, np.ndarray]:
    """Gram-Schmidt on a spanning pair, rejecting nearly parallel inputs."""
    u = np.asarray(e1, dtype=float)
    w = np.asarray(e2, dtype=float)
    s = np.linalg.svd(np.vstack([u, w]), compute_uv=False)
    if s[1] == 0 or s[0] / s[1] > max_condition:
        raise SubspaceError("subspace spanning pair is degenerate")
    u = u / np.linalg.norm(u)
    w = w - np.dot(w, u) * u
    w = w / np.linalg.norm(w)
    return as_vector(u), as_vector(w)
