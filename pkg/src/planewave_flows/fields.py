"""Evaluable flow fields built from plane-wave terms.

A :class:`FlowField` is a sum of terms, each with closed-form derivatives:

* velocity: :class:`PlaneWaveComponent` ``a * psi(t, k.x - omega t)`` plus a
  constant drift ``c``;
* pressure and buoyancy: :class:`ScalarWave`, :class:`LinearTerm`,
  :class:`ConstantTerm` and the quadratic :class:`PairTerm` interaction
  potentials;
* forcing: plane waves added to the right-hand side of the momentum equation.

All evaluators are vectorised over a batch of samples: ``t`` has shape
``(P,)`` (or is a scalar) and ``x`` has shape ``(P, n)``.  A single point
``x`` of shape ``(n,)`` returns unbatched arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Any, Callable, Mapping

import numpy as np

from .core import ModelParams, StructuralError, as_vector
from .shapes import WaveShape


@dataclass(frozen=True, eq=False)
class PlaneWaveComponent:
    """One travelling plane wave ``direction * shape(t, wavevector.x - omega t)``."""

    direction: np.ndarray
    wavevector: np.ndarray
    shape: WaveShape
    # None until a builder assigns omega = c.k
    omega: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "direction", as_vector(self.direction, name="direction"))
        object.__setattr__(self, "wavevector", as_vector(self.wavevector, self.direction.shape[0], "wavevector"))
        if self.omega is not None:
            object.__setattr__(self, "omega", float(self.omega))

    @property
    def dim(self) -> int:
        return self.direction.shape[0]

    def phase(self, t, x):
        if self.omega is None:
            raise StructuralError("wave frequency was never assigned")
        return _dot_rows(x, self.wavevector) - self.omega * t

    def with_shape(self, shape: WaveShape) -> "PlaneWaveComponent":
        return replace(self, shape=shape)


@dataclass(frozen=True, eq=False)
class ScalarWave:
    """Scalar plane wave ``scale * shape(t, wavevector.x - omega t)``."""

    wavevector: np.ndarray
    omega: float
    shape: WaveShape
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "wavevector", as_vector(self.wavevector, name="wavevector"))
        object.__setattr__(self, "omega", float(self.omega))

    def phase(self, t, x):
        return _dot_rows(x, self.wavevector) - self.omega * t


@dataclass(frozen=True, eq=False)
class LinearTerm:
    """``gradient . x``; used for the drift pressure and the parallel-flow head."""

    gradient: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gradient", as_vector(self.gradient, name="gradient"))


@dataclass(frozen=True, eq=False)
class ConstantTerm:
    value: float


@dataclass(frozen=True, eq=False)
class PairTerm:
    """Quadratic interaction of two velocity waves.

    ``coef_value * psi_1 psi_2 + coef_deriv * d_xi psi_1 d_xi psi_2``, where
    ``psi_i`` are the profiles of ``first`` and ``second`` at their phases.
    """

    first: PlaneWaveComponent
    second: PlaneWaveComponent
    coef_value: float
    coef_deriv: float


ScalarTerm = ScalarWave | LinearTerm | ConstantTerm | PairTerm


@dataclass(frozen=True)
class Jet:
    """Value and derivatives of a field: ``d/dt``, spatial gradient and Laplacian.

    For a vector field of dimension ``m`` the gradient has shape ``(..., m, n)``
    with ``gradient[..., i, j] = d v_i / d x_j``.
    """

    value: np.ndarray
    time_deriv: np.ndarray
    gradient: np.ndarray
    laplacian: np.ndarray


@dataclass(frozen=True)
class FieldJet:
    velocity: Jet
    pressure: np.ndarray
    pressure_gradient: np.ndarray
    buoyancy: Jet
    forcing: np.ndarray


@dataclass(frozen=True, eq=False)
class FlowField:
    """Immutable explicit solution candidate ``(v, p, b)``.

    ``system`` is ``"navier_stokes"`` (Euler when ``nu == 0``) or
    ``"boussinesq"``.  ``meta`` records family-specific data such as the
    validated constraints, negative-control flags and interaction groups.
    """

    params: ModelParams
    family: str
    system: str = "navier_stokes"
    velocity: tuple[PlaneWaveComponent, ...] = ()
    drift: np.ndarray | None = None
    pressure: tuple = ()
    buoyancy: tuple = ()
    forcing: tuple[PlaneWaveComponent, ...] = ()
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        n = self.params.dim
        drift = np.zeros(n) if self.drift is None else self.drift
        object.__setattr__(self, "drift", as_vector(drift, n, "drift"))
        object.__setattr__(self, "velocity", tuple(self.velocity))
        object.__setattr__(self, "pressure", tuple(self.pressure))
        object.__setattr__(self, "buoyancy", tuple(self.buoyancy))
        object.__setattr__(self, "forcing", tuple(self.forcing))
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))
        for w in self.velocity + self.forcing:
            if w.dim != n:
                raise StructuralError(f"wave of dimension {w.dim} in a {n}-dimensional field")
        if self.system not in ("navier_stokes", "boussinesq"):
            raise StructuralError(f"unknown system {self.system!r}")
        if self.system == "boussinesq" and n != 3:
            raise StructuralError("the Boussinesq system is posed on R^3")

    @property
    def dim(self) -> int:
        return self.params.dim

    @property
    def non_solution(self) -> bool:
        return bool(self.meta.get("non_solution", False))

    def velocity_at(self, t, x):
        return evaluate_values(self, t, x)[0]

    def pressure_at(self, t, x):
        return evaluate_values(self, t, x)[1]

    def buoyancy_at(self, t, x):
        return evaluate_values(self, t, x)[2]

    def forcing_at(self, t, x):
        return evaluate_values(self, t, x)[3]

    def replace(self, **changes) -> "FlowField":
        return replace(self, **changes)

    def map_waves(self, fn: Callable[[Any], Any]) -> "FlowField":
        """Rebuild every wave-bearing term through ``fn``, keeping pair links intact."""
        memo: dict[int, Any] = {}

        def mapped(w):
            if id(w) not in memo:
                memo[id(w)] = fn(w)
            return memo[id(w)]

        def scalar(term):
            if isinstance(term, ScalarWave):
                return mapped(term)
            if isinstance(term, PairTerm):
                return replace(term, first=mapped(term.first), second=mapped(term.second))
            return term

        meta = dict(self.meta)
        if "groups" in meta:
            meta["groups"] = tuple(g.map_waves(mapped) for g in meta["groups"])
        return replace(
            self,
            velocity=tuple(mapped(w) for w in self.velocity),
            pressure=tuple(scalar(p) for p in self.pressure),
            buoyancy=tuple(scalar(b) for b in self.buoyancy),
            forcing=tuple(mapped(w) for w in self.forcing),
            meta=meta,
        )


@dataclass(frozen=True, eq=False)
class InteractionGroup:
    """Waves sharing one plane ``span(e1, e2)`` and one wavelength.

    ``pressure_coef`` is the factor in front of the interaction potential
    ``h`` in the pressure (``-rho0`` for Navier-Stokes, ``-1`` for Boussinesq).
    """

    basis: tuple[np.ndarray, np.ndarray]
    wavelength: float
    waves: tuple[PlaneWaveComponent, ...]
    pressure_coef: float

    def map_waves(self, fn):
        return replace(self, waves=tuple(fn(w) for w in self.waves))

    def same_plane(self, other: "InteractionGroup", tol: float = 1e-10) -> bool:
        p = _projector(self.basis)
        q = _projector(other.basis)
        return bool(np.max(np.abs(p - q)) <= tol)


def _projector(basis):
    e1, e2 = basis
    return np.outer(e1, e1) + np.outer(e2, e2)


def _dot_rows(x: np.ndarray, k: np.ndarray) -> np.ndarray:
    # explicit loop keeps the summation order fixed for any batch size
    out = x[..., 0] * k[0]
    for j in range(1, k.shape[0]):
        out = out + x[..., j] * k[j]
    return out


def as_batch(t, x, dim: int):
    """Normalise ``(t, x)`` to shapes ``(P,)`` and ``(P, n)``."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != dim:
        raise StructuralError(f"points must have shape (P, {dim}), got {x.shape}")
    t = np.broadcast_to(np.asarray(t, dtype=float), (x.shape[0],)).copy()
    return t, x, single


class _WaveCache:
    def __init__(self, t, x):
        self.t = t
        self.x = x
        self._store: dict[int, tuple] = {}

    def __call__(self, wave):
        key = id(wave)
        if key not in self._store:
            xi = wave.phase(self.t, self.x)
            self._store[key] = wave.shape.evaluate(self.t, xi)
        return self._store[key]


def _scalar_value(term, cache: _WaveCache, x):
    if isinstance(term, ScalarWave):
        return term.scale * cache(term)[0]
    if isinstance(term, LinearTerm):
        return _dot_rows(x, term.gradient)
    if isinstance(term, ConstantTerm):
        return np.full(x.shape[0], float(term.value))
    if isinstance(term, PairTerm):
        f = cache(term.first)
        g = cache(term.second)
        return term.coef_value * f[0] * g[0] + term.coef_deriv * f[1] * g[1]
    raise StructuralError(f"unknown scalar term {type(term).__name__}")


def _scalar_jet(term, cache: _WaveCache, x, n):
    """Value, time derivative, gradient and Laplacian of one scalar term."""
    p = x.shape[0]
    if isinstance(term, ScalarWave):
        psi, d1, d2, dt = cache(term)
        k = term.wavevector
        s = term.scale
        return (s * psi, s * (dt - term.omega * d1), s * d1[:, None] * k[None, :], s * d2 * float(np.dot(k, k)))
    if isinstance(term, LinearTerm):
        return (_dot_rows(x, term.gradient), np.zeros(p), np.broadcast_to(term.gradient, (p, n)).copy(), np.zeros(p))
    if isinstance(term, ConstantTerm):
        return np.full(p, float(term.value)), np.zeros(p), np.zeros((p, n)), np.zeros(p)
    if isinstance(term, PairTerm):
        f0, f1, f2, _ = cache(term.first)
        g0, g1, g2, _ = cache(term.second)
        k1 = term.first.wavevector
        k2 = term.second.wavevector
        cv, cd = term.coef_value, term.coef_deriv
        value = cv * f0 * g0 + cd * f1 * g1
        along_k1 = cv * f1 * g0 + cd * f2 * g1
        along_k2 = cv * f0 * g1 + cd * f1 * g2
        grad = along_k1[:, None] * k1[None, :] + along_k2[:, None] * k2[None, :]
        # time derivative and Laplacian of pressure are never needed
        return value, np.full(p, np.nan), grad, np.full(p, np.nan)
    raise StructuralError(f"unknown scalar term {type(term).__name__}")


def evaluate_values(field: FlowField, t, x):
    """Return ``(v, p, b, F)`` at the samples without derivatives."""
    n = field.dim
    t, x, single = as_batch(t, x, n)
    cache = _WaveCache(t, x)
    v = np.broadcast_to(field.drift, x.shape).copy()
    for w in field.velocity:
        v += cache(w)[0][:, None] * w.direction[None, :]
    p = np.zeros(x.shape[0])
    for term in field.pressure:
        p += _scalar_value(term, cache, x)
    b = np.zeros(x.shape[0])
    for term in field.buoyancy:
        b += _scalar_value(term, cache, x)
    forcing = np.zeros_like(x)
    for w in field.forcing:
        forcing += cache(w)[0][:, None] * w.direction[None, :]
    if single:
        return v[0], p[0], b[0], forcing[0]
    return v, p, b, forcing


def evaluate_jet(field: FlowField, t, x) -> FieldJet:
    """Exact jets of ``v``, ``p`` and ``b`` by the chain rule through each phase."""
    n = field.dim
    t, x, single = as_batch(t, x, n)
    cache = _WaveCache(t, x)
    count = x.shape[0]

    v = np.broadcast_to(field.drift, x.shape).copy()
    v_t = np.zeros((count, n))
    v_grad = np.zeros((count, n, n))
    v_lap = np.zeros((count, n))
    for w in field.velocity:
        psi, d1, d2, dt = cache(w)
        a = w.direction
        k = w.wavevector
        v += psi[:, None] * a[None, :]
        v_t += (dt - w.omega * d1)[:, None] * a[None, :]
        v_grad += d1[:, None, None] * (a[:, None] * k[None, :])[None, :, :]
        v_lap += (d2 * float(np.dot(k, k)))[:, None] * a[None, :]

    p = np.zeros(count)
    p_grad = np.zeros((count, n))
    for term in field.pressure:
        val, _, grad, _ = _scalar_jet(term, cache, x, n)
        p += val
        p_grad += grad

    b = np.zeros(count)
    b_t = np.zeros(count)
    b_grad = np.zeros((count, n))
    b_lap = np.zeros(count)
    for term in field.buoyancy:
        if isinstance(term, PairTerm):
            raise StructuralError("pair terms are not allowed in the buoyancy")
        val, dt, grad, lap = _scalar_jet(term, cache, x, n)
        b += val
        b_t += dt
        b_grad += grad
        b_lap += lap

    forcing = np.zeros((count, n))
    for w in field.forcing:
        forcing += cache(w)[0][:, None] * w.direction[None, :]

    jet = FieldJet(Jet(v, v_t, v_grad, v_lap), p, p_grad, Jet(b, b_t, b_grad, b_lap), forcing)
    return unbatch(jet) if single else jet


def unbatch(jet: FieldJet) -> FieldJet:
    return FieldJet(
        Jet(*(a[0] for a in (jet.velocity.value, jet.velocity.time_deriv, jet.velocity.gradient, jet.velocity.laplacian))),
        jet.pressure[0],
        jet.pressure_gradient[0],
        Jet(*(a[0] for a in (jet.buoyancy.value, jet.buoyancy.time_deriv, jet.buoyancy.gradient, jet.buoyancy.laplacian))),
        jet.forcing[0],
    )


def zero_field(params: ModelParams, system: str = "navier_stokes") -> FlowField:
    return FlowField(params, "zero", system)
