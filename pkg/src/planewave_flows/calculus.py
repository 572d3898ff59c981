"""Space-time derivatives of flow fields and diagnostics on the advective term.

:func:`eval_jet` is exact (chain rule through every phase variable);
:func:`fd_jet` is an independent second-order finite-difference oracle that
only ever calls the field's value evaluators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import StructuralError
from .fields import FieldJet, FlowField, Jet, as_batch, evaluate_jet, evaluate_values, unbatch


def eval_jet(field: FlowField, t, x) -> FieldJet:
    return evaluate_jet(field, t, x)


def _default_steps(t, x):
    h_x = 1e-4 * np.maximum(1.0, np.linalg.norm(x, axis=1))
    h_t = 1e-4 * np.maximum(1.0, np.abs(t))
    return h_x, h_t


def fd_jet(field: FlowField, t, x, h: float | None = None) -> FieldJet:
    """Finite-difference jet with central second-order stencils.

    Parameters
    ----------
    field : FlowField
    t, x : array_like
        Sample times and points.
    h : float, optional
        Step used for both space and time.  Defaults to
        ``1e-4 * max(1, |x|)`` in space and ``1e-4 * max(1, t)`` in time.

    Notes
    -----
    Where ``t < h`` the time derivative uses the one-sided stencil
    ``(-3 f(t) + 4 f(t+h) - f(t+2h)) / (2h)`` so no negative times are sampled.
    """
    n = field.dim
    t, x, single = as_batch(t, x, n)
    count = x.shape[0]
    if h is None:
        h_x, h_t = _default_steps(t, x)
    else:
        if not h > 0:
            raise StructuralError("finite-difference step must be positive")
        h_x = np.full(count, float(h))
        h_t = np.full(count, float(h))

    v0, p0, b0, forcing = evaluate_values(field, t, x)

    v_grad = np.zeros((count, n, n))
    v_lap = np.zeros((count, n))
    p_grad = np.zeros((count, n))
    b_grad = np.zeros((count, n))
    b_lap = np.zeros(count)
    for j in range(n):
        step = np.zeros((count, n))
        step[:, j] = h_x
        vp, pp, bp, _ = evaluate_values(field, t, x + step)
        vm, pm, bm, _ = evaluate_values(field, t, x - step)
        v_grad[:, :, j] = (vp - vm) / (2.0 * h_x[:, None])
        v_lap += (vp - 2.0 * v0 + vm) / (h_x**2)[:, None]
        p_grad[:, j] = (pp - pm) / (2.0 * h_x)
        b_grad[:, j] = (bp - bm) / (2.0 * h_x)
        b_lap += (bp - 2.0 * b0 + bm) / h_x**2

    central = t >= h_t
    v1, _, b1, _ = evaluate_values(field, t + h_t, x)
    t_back = np.where(central, t - h_t, t + 2.0 * h_t)
    v2, _, b2, _ = evaluate_values(field, t_back, x)
    v_t = np.where(
        central[:, None],
        (v1 - v2) / (2.0 * h_t[:, None]),
        (-3.0 * v0 + 4.0 * v1 - v2) / (2.0 * h_t[:, None]),
    )
    b_t = np.where(central, (b1 - b2) / (2.0 * h_t), (-3.0 * b0 + 4.0 * b1 - b2) / (2.0 * h_t))

    jet = FieldJet(Jet(v0, v_t, v_grad, v_lap), p0, p_grad, Jet(b0, b_t, b_grad, b_lap), forcing)
    return unbatch(jet) if single else jet


def advection(velocity: np.ndarray, gradient: np.ndarray) -> np.ndarray:
    """``(v . grad) w`` from ``v`` of shape (P, n) and ``grad w`` of shape (P, m, n)."""
    out = gradient[..., 0] * velocity[..., None, 0]
    for j in range(1, velocity.shape[-1]):
        out = out + gradient[..., j] * velocity[..., None, j]
    return out


def advective_term(field: FlowField, t, x, jet: FieldJet | None = None) -> np.ndarray:
    """The nonlinear term ``(v . grad) v``."""
    if jet is None:
        jet = eval_jet(field, t, x)
    return advection(jet.velocity.value, jet.velocity.gradient)


def divergence(field: FlowField, t, x, jet: FieldJet | None = None) -> np.ndarray:
    if jet is None:
        jet = eval_jet(field, t, x)
    return np.trace(jet.velocity.gradient, axis1=-2, axis2=-1)


@dataclass(frozen=True)
class GradientCheck:
    """Outcome of :func:`is_gradient_field`.

    ``status`` is ``"zero"``, ``"gradient"`` or ``"not_gradient"``;
    ``witness`` holds the sample with the largest relative antisymmetry.
    """

    status: str
    max_norm: float
    max_antisymmetry: float
    witness: dict

    @property
    def is_gradient(self) -> bool:
        return self.status in ("zero", "gradient")


def is_gradient_field(
    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray],
    sample: tuple[np.ndarray, np.ndarray],
    tol: float = 1e-6,
    h: float | None = None,
    length_scale: float = 1.0,
) -> GradientCheck:
    """Certify on a sample that a vector field is a gradient.

    A smooth field on R^n is a gradient iff its Jacobian is symmetric.  The
    Jacobian is taken by central differences with step ``h``
    (default ``1e-5 * length_scale``); the field passes when the
    antisymmetric part satisfies ``|J - J^T|/2 <= tol (1 + |J|)`` (Frobenius
    norms) at every sample.
    """
    t, x = sample
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] == 0:
        raise StructuralError("gradient certification needs at least one sample")
    t = np.broadcast_to(np.asarray(t, dtype=float), (x.shape[0],))
    n = x.shape[1]
    h = 1e-5 * length_scale if h is None else h

    values = np.asarray(evaluator(t, x))
    norms = np.linalg.norm(values, axis=1)
    jac = np.zeros((x.shape[0], n, n))
    for j in range(n):
        step = np.zeros(n)
        step[j] = h
        jac[:, :, j] = (np.asarray(evaluator(t, x + step)) - np.asarray(evaluator(t, x - step))) / (2.0 * h)
    asym = 0.5 * np.linalg.norm(jac - np.swapaxes(jac, 1, 2), axis=(1, 2))
    scale = 1.0 + np.linalg.norm(jac, axis=(1, 2))
    rel = asym / scale
    worst = int(np.argmax(rel))
    witness = {"t": float(t[worst]), "x": x[worst].tolist(), "antisymmetry": float(asym[worst])}

    if float(np.max(norms)) <= tol:
        status = "zero"
    elif float(rel[worst]) <= tol:
        status = "gradient"
    else:
        status = "not_gradient"
    return GradientCheck(status, float(np.max(norms)), float(np.max(asym)), witness)
