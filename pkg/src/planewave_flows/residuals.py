"""Pointwise residuals of the governing equations and a seeded verifier."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .calculus import advection, eval_jet, fd_jet
from .core import ConstraintError, FlowError, ModelParams, StructuralError
from .fields import FieldJet, FlowField, evaluate_values

SYSTEMS = ("euler", "navier_stokes", "boussinesq", "forced")
CHANNELS = ("momentum", "continuity", "buoyancy")


@dataclass(frozen=True)
class ResidualVector:
    momentum: np.ndarray
    continuity: np.ndarray
    buoyancy: np.ndarray


def _ns_momentum(jet: FieldJet, params: ModelParams) -> np.ndarray:
    v = jet.velocity
    return v.time_deriv + advection(v.value, v.gradient) + jet.pressure_gradient / params.rho0 - params.nu * v.laplacian


def _continuity(jet: FieldJet) -> np.ndarray:
    return np.trace(jet.velocity.gradient, axis1=-2, axis2=-1)


def _jet(field, t, x, jet):
    return eval_jet(field, t, x) if jet is None else jet


def residual_navier_stokes(field: FlowField, params: ModelParams | None, t, x, jet: FieldJet | None = None) -> ResidualVector:
    """``dv/dt + (v.grad)v + grad(p)/rho0 - nu Lap v`` and ``div v``."""
    params = field.params if params is None else params
    jet = _jet(field, t, x, jet)
    cont = _continuity(jet)
    return ResidualVector(_ns_momentum(jet, params), cont, np.zeros_like(cont))


def residual_forced(field: FlowField, params: ModelParams | None, forcing, t, x, jet: FieldJet | None = None) -> ResidualVector:
    """Navier-Stokes residual minus the forcing ``F(t, x)``.

    ``forcing`` is an array of forcing values at the samples, a callable
    ``F(t, x)``, or ``None`` to use the forcing carried by ``field``.
    """
    params = field.params if params is None else params
    jet = _jet(field, t, x, jet)
    if forcing is None:
        f_val = jet.forcing
    elif callable(forcing):
        f_val = np.asarray(forcing(t, x), dtype=float)
    else:
        f_val = np.asarray(forcing, dtype=float)
    res = residual_navier_stokes(field, params, t, x, jet=jet)
    return ResidualVector(res.momentum - f_val, res.continuity, res.buoyancy)


def _coriolis(v: np.ndarray, f: float) -> np.ndarray:
    # f e3 x v
    out = np.zeros_like(v)
    out[..., 0] = -f * v[..., 1]
    out[..., 1] = f * v[..., 0]
    return out


def residual_boussinesq(field: FlowField, params: ModelParams | None, t, x, jet: FieldJet | None = None, forcing=None) -> ResidualVector:
    """Rotating Boussinesq residual on R^3.

    momentum ``dv/dt + (v.grad)v + f e3 x v + grad p - e3 b - nu Lap v - F``,
    buoyancy ``db/dt + (v.grad)b - strat v_3 - mu Lap b``.  ``F`` defaults to
    the forcing carried by the field (zero for unforced families).
    """
    params = field.params if params is None else params
    if field.dim != 3:
        raise StructuralError("the Boussinesq residual is defined on R^3")
    jet = _jet(field, t, x, jet)
    v = jet.velocity
    b = jet.buoyancy
    mom = v.time_deriv + advection(v.value, v.gradient) + _coriolis(v.value, params.f) + jet.pressure_gradient - params.nu * v.laplacian
    mom[..., 2] -= b.value
    mom -= jet.forcing if forcing is None else np.asarray(forcing, dtype=float)
    b_adv = advection(v.value, b.gradient[..., None, :])[..., 0]
    buoy = b.time_deriv + b_adv - params.strat * v.value[..., 2] - params.mu * b.laplacian
    return ResidualVector(mom, _continuity(jet), buoy)


def residual(field: FlowField, system: str, t, x, jet: FieldJet | None = None, params: ModelParams | None = None) -> ResidualVector:
    params = field.params if params is None else params
    if system == "boussinesq":
        return residual_boussinesq(field, params, t, x, jet)
    if system == "forced":
        return residual_forced(field, params, None, t, x, jet)
    if system == "euler":
        if params.nu != 0:
            raise ConstraintError("the Euler residual needs nu == 0")
        return residual_navier_stokes(field, params, t, x, jet)
    if system == "navier_stokes":
        return residual_navier_stokes(field, params, t, x, jet)
    raise StructuralError(f"unknown system {system!r}")


def default_system(field: FlowField) -> str:
    if field.system == "boussinesq":
        return "boussinesq"
    if field.forcing:
        return "forced"
    return "euler" if field.params.nu == 0 else "navier_stokes"


@dataclass(frozen=True)
class SamplerSpec:
    """Seeded uniform sampler on ``box^n x t_range``.

    ``box`` is either one ``(lo, hi)`` pair applied to every coordinate or a
    list of per-coordinate pairs.
    """

    box: tuple = (-math.pi, math.pi)
    t_range: tuple[float, float] = (0.0, 1.0)
    count: int = 1000
    seed: int = 42

    def bounds(self, dim: int) -> np.ndarray:
        box = np.asarray(self.box, dtype=float)
        if box.shape == (2,):
            box = np.tile(box, (dim, 1))
        if box.shape != (dim, 2):
            raise StructuralError(f"sampler box must be a pair or {dim} pairs")
        return box

    def draw(self, dim: int) -> tuple[np.ndarray, np.ndarray]:
        if self.count <= 0:
            raise StructuralError("the sampler needs a positive sample count")
        rng = np.random.default_rng(self.seed)
        box = self.bounds(dim)
        t = rng.uniform(self.t_range[0], self.t_range[1], self.count)
        x = rng.uniform(box[:, 0], box[:, 1], (self.count, dim))
        return t, x


@dataclass
class VerificationReport:
    """Residual statistics of one field over one seeded sample.

    ``max_abs`` and ``rms`` are keyed by channel (momentum uses the largest
    component); ``passed`` holds iff every ``max_abs`` is within ``tolerance``.
    """

    family: str
    system: str
    oracle: str
    sample_count: int
    tolerance: float
    max_abs: dict
    rms: dict
    passed: bool
    witness: dict
    step: float | None = None
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def summary_line(self) -> str:
        mx = max(self.max_abs.values())
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.family:<28} {self.system:<13} {self.oracle:<8} max={mx:.3e} tol={self.tolerance:.1e}"


def _channels(field, system, t, x, oracle, h):
    if oracle == "analytic":
        jet = eval_jet(field, t, x)
    elif oracle == "fd":
        jet = fd_jet(field, t, x, h)
    else:
        raise StructuralError(f"unknown oracle {oracle!r}")
    res = residual(field, system, t, x, jet)
    return np.max(np.abs(res.momentum), axis=1), np.abs(res.continuity), np.abs(res.buoyancy)


def verify(
    field: FlowField,
    system: str | None = None,
    sampler: SamplerSpec | None = None,
    tolerance: float = 1e-8,
    oracle: str = "analytic",
    h: float = 1e-3,
    workers: int = 1,
) -> VerificationReport:
    """Evaluate residuals on a seeded sample and compare with ``tolerance``.

    Samples are drawn up front from the seed and split into contiguous
    chunks for the workers; per-sample results are reassembled in sample
    order before any reduction, so the report is bit-identical for any
    worker count.
    """
    sampler = SamplerSpec() if sampler is None else sampler
    system = default_system(field) if system is None else system
    if system not in SYSTEMS:
        raise StructuralError(f"unknown system {system!r}")
    if not tolerance > 0:
        raise StructuralError("tolerance must be positive")
    t, x = sampler.draw(field.dim)

    if workers <= 1:
        parts = [_channels(field, system, t, x, oracle, h)]
    else:
        chunks = np.array_split(np.arange(t.shape[0]), workers)
        chunks = [c for c in chunks if c.size]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda idx: _channels(field, system, t[idx], x[idx], oracle, h), chunks))
    per_sample = [np.concatenate([p[i] for p in parts]) for i in range(3)]

    max_abs = {}
    rms = {}
    worst = None
    for name, vals in zip(CHANNELS, per_sample):
        if not np.all(np.isfinite(vals)):
            raise FlowError(f"non-finite {name} residual")
        max_abs[name] = float(np.max(vals))
        rms[name] = float(np.sqrt(np.mean(vals**2)))
        idx = int(np.argmax(vals))
        if worst is None or vals[idx] > worst[2]:
            worst = (name, idx, float(vals[idx]))
    name, idx, value = worst
    witness = {"channel": name, "t": float(t[idx]), "x": x[idx].tolist(), "value": value}
    passed = all(v <= tolerance for v in max_abs.values())
    return VerificationReport(
        family=field.family,
        system=system,
        oracle=oracle,
        sample_count=int(t.shape[0]),
        tolerance=float(tolerance),
        max_abs=max_abs,
        rms=rms,
        passed=passed,
        witness=witness,
        step=float(h) if oracle == "fd" else None,
    )


def decay_rate_estimate(field: FlowField, t0: float, t1: float, grid: np.ndarray) -> float:
    """Exponential decay rate of ``sup |v - c|`` over ``grid`` between ``t0`` and ``t1``."""
    if not t1 > t0 >= 0:
        raise StructuralError("need t1 > t0 >= 0")
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    n0 = _sup_deviation(field, t0, grid)
    n1 = _sup_deviation(field, t1, grid)
    if n0 == 0.0:
        raise StructuralError("velocity deviation vanishes at t0; no decay rate defined")
    return -math.log(n1 / n0) / (t1 - t0)


def _sup_deviation(field, t, grid):
    v = evaluate_values(field, t, grid)[0]
    return float(np.max(np.abs(v - field.drift[None, :])))


def sample_grid(dim: int, shape, box=(-math.pi, math.pi), endpoint: bool = False) -> np.ndarray:
    """Tensor grid in lexicographic order (last coordinate varies fastest)."""
    shape = [int(s) for s in np.broadcast_to(np.asarray(shape), (dim,))]
    box = np.asarray(box, dtype=float)
    if box.shape == (2,):
        box = np.tile(box, (dim, 1))
    axes = [np.linspace(box[i, 0], box[i, 1], shape[i], endpoint=endpoint) for i in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


__all__ = [
    "ResidualVector",
    "SamplerSpec",
    "VerificationReport",
    "decay_rate_estimate",
    "residual",
    "residual_boussinesq",
    "residual_forced",
    "residual_navier_stokes",
    "sample_grid",
    "verify",
]
