"""Forced solutions by variation of constants for ``L = nu Lap``.

Under the family constraints the nonlinear term vanishes or is a pressure
gradient, so the forced problem reduces to ``v_t = nu Lap v + F``.  For a
time-independent sine forcing mode with wave number ``kappa`` the Duhamel
integral has the closed form ``(1 - exp(-nu kappa^2 t)) / (nu kappa^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    ORTHO_TOL,
    ConstraintError,
    IncompatibleForcingError,
    ModelParams,
    RegimeError,
    StructuralError,
    UnsupportedShapeError,
    as_vector,
)
from .fields import FlowField, PlaneWaveComponent, ScalarWave, zero_field
from .flows import FlowSpec, build_interacting_transverse, build_transverse, interaction_pressure
from .residuals import sample_grid
from .shapes import DuhamelSine, FourierSum, SineMode

UNIT_TOL = 1e-12


def _sine_modes(wave: PlaneWaveComponent) -> list[PlaneWaveComponent]:
    shape = wave.shape
    if isinstance(shape, SineMode):
        parts = [shape]
    elif isinstance(shape, FourierSum):
        parts = list(shape.modes)
    else:
        raise UnsupportedShapeError(f"forcing profiles must be sine modes, got {type(shape).__name__}")
    if shape.kappa != 0.0:
        raise ConstraintError("forcing must be time independent (kappa == 0)")
    out = []
    for mode in parts:
        if mode.beta != 0.0:
            out.append(PlaneWaveComponent(wave.direction, wave.wavevector, SineMode(mode.beta, mode.sigma, mode.delta), 0.0))
    return out


@dataclass(frozen=True, eq=False)
class PlaneWaveForcing:
    """Time-independent forcing ``sum a_j psi_j(k_j . x)`` with sine profiles."""

    components: tuple[PlaneWaveComponent, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    def modes(self) -> list[PlaneWaveComponent]:
        return [m for w in self.components for m in _sine_modes(w)]


@dataclass(frozen=True, eq=False)
class DensityForcing:
    """Quadrature of ``int alpha(xi) sin(xi k.x) d xi a`` over wave numbers.

    Parameters
    ----------
    direction : vector
        ``a``, orthogonal to ``wavevector``.
    wavevector : vector
        Unit vector ``k``.
    nodes, weights, values : array_like
        Quadrature nodes ``xi_q >= 0``, weights ``w_q`` and density values
        ``alpha(xi_q)``.
    """

    direction: np.ndarray
    wavevector: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        a = as_vector(self.direction, name="direction")
        k = as_vector(self.wavevector, a.shape[0], "wavevector")
        nodes = as_vector(self.nodes, name="nodes")
        weights = as_vector(self.weights, nodes.shape[0], "weights")
        values = as_vector(self.values, nodes.shape[0], "values")
        if abs(float(np.linalg.norm(k)) - 1.0) > UNIT_TOL:
            raise ConstraintError("density forcing needs a unit wave vector")
        if abs(float(np.dot(a, k))) > ORTHO_TOL * float(np.linalg.norm(a)):
            raise ConstraintError("density forcing direction must be orthogonal to its wave vector")
        if np.any(nodes < 0):
            raise StructuralError("wave-number nodes must be non-negative")
        for name, v in (("direction", a), ("wavevector", k), ("nodes", nodes), ("weights", weights), ("values", values)):
            object.__setattr__(self, name, v)
        if not math.isfinite(self.integrability_bound):
            raise ConstraintError("density violates the integrability bound")

    @classmethod
    def trapezoid(cls, direction, wavevector, density: Callable[[np.ndarray], np.ndarray], xi_max: float, count: int) -> "DensityForcing":
        """Trapezoidal table on ``[0, xi_max]`` with ``count`` nodes."""
        if count < 2 or not xi_max > 0:
            raise StructuralError("trapezoid tables need count >= 2 and xi_max > 0")
        nodes = np.linspace(0.0, xi_max, count)
        weights = np.full(count, xi_max / (count - 1))
        weights[[0, -1]] *= 0.5
        return cls(direction, wavevector, nodes, weights, np.asarray(density(nodes), dtype=float))

    @property
    def integrability_bound(self) -> float:
        """``sum_{xi<=1} |alpha| w + sum_{xi>1} xi^2 |alpha| w``."""
        mag = np.abs(self.values) * self.weights
        return float(np.sum(np.where(self.nodes <= 1.0, mag, self.nodes**2 * mag)))

    def modes(self) -> list[PlaneWaveComponent]:
        out = []
        for xi, w, alpha in zip(self.nodes, self.weights, self.values):
            # the xi = 0 node contributes sin(0) = 0
            if xi > 0.0 and alpha * w != 0.0:
                out.append(PlaneWaveComponent(self.direction, xi * self.wavevector, SineMode(float(alpha * w)), 0.0))
        return out

    def as_spec(self, params: ModelParams) -> FlowSpec:
        """The same table read as a transverse initial condition."""
        return FlowSpec("transverse", params, (tuple(self.modes()),))


ForcingSpec = PlaneWaveForcing | DensityForcing


@dataclass(frozen=True, eq=False)
class ForcedSolution:
    """Forced flow ``v = exp(Lt) v0 + int_0^t exp(L(t-s)) F ds``.

    ``field`` is the full solution (it carries ``F`` for the forced
    residual); ``homogeneous`` and ``particular`` are its two parts and
    ``steady`` the steady state ``-L^{-1} F`` when it exists.
    """

    field: FlowField
    homogeneous: FlowField
    particular: FlowField
    steady: FlowField | None
    unbounded_growth: bool

    def velocity(self, t, x):
        return self.field.velocity_at(t, x)

    def duhamel_form(self, t, x):
        """``v_s + exp(Lt)(v0 - v_s)``, evaluated independently of :attr:`field`."""
        if self.steady is None:
            raise RegimeError("no steady state exists for this forcing")
        nu = self.field.params.nu
        relax = [
            PlaneWaveComponent(w.direction, w.wavevector, SineMode(-w.shape.beta, w.shape.sigma, w.shape.delta, nu * float(np.dot(w.wavevector, w.wavevector))), 0.0)
            for w in self.steady.velocity
        ]
        gap = FlowField(self.field.params, "relaxation", velocity=list(self.homogeneous.velocity) + relax)
        return self.steady.velocity_at(t, x) + gap.velocity_at(t, x)


def _homogeneous(v0: FlowSpec | None, params: ModelParams) -> FlowField:
    if v0 is None:
        return zero_field(params)
    if v0.params != params:
        raise StructuralError("initial condition and forcing use different parameters")
    if np.any(v0.drift):
        raise ConstraintError("forced solutions are built with zero drift")
    if v0.family == "transverse":
        return build_transverse(v0)
    if v0.family == "interacting_transverse":
        return build_interacting_transverse(v0)
    raise StructuralError(f"unsupported initial-condition family {v0.family!r}")


def _joint_pressure(waves, params: ModelParams):
    try:
        return interaction_pressure(waves, -params.rho0)
    except ConstraintError as exc:
        raise IncompatibleForcingError(f"forcing and initial condition violate the joint constraints: {exc}") from exc


def _check_dim(modes, params):
    for w in modes:
        if w.dim != params.dim:
            raise StructuralError(f"forcing of dimension {w.dim} for a {params.dim}-dimensional flow")


def build_forced_solution(v0: FlowSpec | None, forcing: ForcingSpec, params: ModelParams | None = None) -> ForcedSolution:
    """Closed-form Duhamel solution of the forced constrained problem.

    Parameters
    ----------
    v0 : FlowSpec or None
        Transverse or interacting initial condition with zero drift;
        ``None`` starts from rest.
    forcing : PlaneWaveForcing or DensityForcing
    params : ModelParams, optional
        Defaults to ``v0.params``.

    Raises
    ------
    IncompatibleForcingError
        If forcing and initial condition interact without a closed-form
        pressure.
    """
    if params is None:
        if v0 is None:
            raise StructuralError("params are required when v0 is None")
        params = v0.params
    homogeneous = _homogeneous(v0, params)
    modes = forcing.modes()
    _check_dim(modes, params)
    nu = params.nu
    particular = []
    for w in modes:
        s = w.shape
        kappa = nu * float(np.dot(w.wavevector, w.wavevector))
        particular.append(PlaneWaveComponent(w.direction, w.wavevector, DuhamelSine(s.beta, s.sigma, s.delta, kappa), 0.0))
    waves = list(homogeneous.velocity) + particular
    pressure = _joint_pressure(waves, params)
    full = FlowField(params, "forced", velocity=waves, pressure=pressure, forcing=modes, meta={"unbounded_growth": nu == 0.0 and bool(modes)})
    part_field = FlowField(params, "forced_particular", velocity=particular, pressure=_joint_pressure(particular, params), forcing=modes)
    steady = None
    if nu > 0 and modes and all(np.any(w.wavevector) for w in modes):
        steady = steady_state_from_forcing(forcing, params)
    return ForcedSolution(full, homogeneous, part_field, steady, nu == 0.0 and bool(modes))


def steady_state_from_forcing(forcing: ForcingSpec, params: ModelParams) -> FlowField:
    """Steady state ``v_s = -L^{-1} F``: each mode divided by ``nu kappa^2``.

    Raises
    ------
    RegimeError
        If ``nu == 0`` or a mode has zero wave number (not in the range of
        the Laplacian).
    """
    if not params.nu > 0:
        raise RegimeError("without viscosity a steady state does not exist")
    modes = forcing.modes()
    _check_dim(modes, params)
    waves = []
    for w in modes:
        s = w.shape
        rate = params.nu * float(np.dot(w.wavevector, w.wavevector)) * s.sigma**2
        if rate == 0.0:
            raise RegimeError("a zero-wave-number forcing mode is not in the range of the Laplacian")
        waves.append(PlaneWaveComponent(w.direction, w.wavevector, SineMode(s.beta / rate, s.sigma, s.delta), 0.0))
    return FlowField(params, "steady_forced", velocity=waves, pressure=_joint_pressure(waves, params), forcing=modes)


@dataclass
class StabilityReport:
    """Decay of ``sup |v(t) - v_s|`` on a grid against the modal envelope.

    ``bound`` uses the modal norm ``sum_m sup|mode_m(0)|``, which dominates
    the sup norm, so ``bound_holds`` is guaranteed in exact arithmetic;
    ``sup_bound_holds`` compares against ``exp(-nu kappa_min^2 t)`` times the
    measured initial sup deviation.
    """

    times: list
    deviations: list
    bound: list
    sup_bound: list
    kappa_min: float
    monotone: bool
    bound_holds: bool
    sup_bound_holds: bool

    @property
    def passed(self) -> bool:
        return self.monotone and self.bound_holds


def asymptotic_stability_check(forcing: ForcingSpec, v0: FlowSpec | None, params: ModelParams, t_grid, grid=None, eps: float = 1e-10) -> StabilityReport:
    """Check that forced flows relax to the steady state at the slowest heat rate."""
    if not params.nu > 0:
        raise RegimeError("asymptotic stability needs nu > 0")
    sol = build_forced_solution(v0, forcing, params)
    if sol.steady is None:
        raise RegimeError("no steady state exists for this forcing")
    n = params.dim
    grid = sample_grid(n, 32 if n <= 2 else 12) if grid is None else np.atleast_2d(np.asarray(grid, dtype=float))
    times = [float(t) for t in np.asarray(t_grid, dtype=float)]
    vs = sol.steady.velocity_at(0.0, grid)
    devs = [float(np.max(np.abs(sol.field.velocity_at(t, grid) - vs))) for t in times]

    gap_modes = list(sol.homogeneous.velocity) + [
        PlaneWaveComponent(w.direction, w.wavevector, SineMode(-w.shape.beta, w.shape.sigma, w.shape.delta), 0.0) for w in sol.steady.velocity
    ]
    ks = [float(np.linalg.norm(w.wavevector)) * getattr(w.shape, "sigma", 1.0) for w in gap_modes if _mode_size(w) > 0]
    kappa_min = min(ks) if ks else 0.0
    modal = sum(_mode_size(w) for w in gap_modes)
    rate = params.nu * kappa_min**2
    t0_dev = float(np.max(np.abs(sol.field.velocity_at(0.0, grid) - vs)))
    bound = [math.exp(-rate * t) * modal * (1.0 + eps) for t in times]
    sup_bound = [math.exp(-rate * t) * t0_dev * (1.0 + eps) for t in times]
    slack = 1e-12 * max(devs + [1.0])
    monotone = all(b <= a + slack for a, b in zip(devs, devs[1:]))
    holds = all(d <= b + slack for d, b in zip(devs, bound))
    sup_holds = all(d <= b + slack for d, b in zip(devs, sup_bound))
    return StabilityReport(times, devs, bound, sup_bound, kappa_min, monotone, holds, sup_holds)


def _mode_size(w: PlaneWaveComponent) -> float:
    # sup over x of |psi(0, .) a|
    s = w.shape
    if isinstance(s, SineMode):
        return abs(s.beta) * float(np.max(np.abs(w.direction)))
    raise UnsupportedShapeError("stability envelopes need sine-mode initial data")


@dataclass(frozen=True, eq=False)
class PressureForcingSplit:
    """``F_tilde = psi a_delta`` split into ``F = psi a_F`` and ``p_tilde``.

    With ``a_delta = a_F + delta k_F`` and ``p_tilde = rho0 delta Psi`` the
    identity ``F_tilde - grad(p_tilde) / rho0 = F`` holds.
    """

    forcing_tilde: PlaneWaveComponent
    forcing: PlaneWaveComponent
    pressure: ScalarWave | None


def decompose_pressure_forcing(shape: SineMode, delta: float, k_f, a_f, rho0: float = 1.0) -> PressureForcingSplit:
    k_f = as_vector(k_f, name="k_F")
    a_f = as_vector(a_f, k_f.shape[0], "a_F")
    if abs(float(np.dot(a_f, k_f))) > ORTHO_TOL * float(np.linalg.norm(a_f)) * float(np.linalg.norm(k_f)):
        raise ConstraintError("a_F must be orthogonal to k_F")
    delta = float(delta)
    tilde = PlaneWaveComponent(a_f + delta * k_f, k_f, shape, 0.0)
    plain = PlaneWaveComponent(a_f, k_f, shape, 0.0)
    pressure = ScalarWave(k_f, 0.0, shape.primitive(), scale=rho0 * delta) if delta != 0.0 else None
    return PressureForcingSplit(tilde, plain, pressure)


def apply_pressure_forcing(field_: FlowField, split: PressureForcingSplit) -> FlowField:
    """Replace the carried ``F`` by ``F_tilde`` and add ``p_tilde`` to the pressure.

    ``field_`` must carry ``split.forcing``; the swap is done by adding
    ``F_tilde - F`` so no term has to be located and removed.
    """
    f = split.forcing
    undo = PlaneWaveComponent(-f.direction, f.wavevector, f.shape, f.omega)
    pressure = field_.pressure + ((split.pressure,) if split.pressure is not None else ())
    return field_.replace(forcing=field_.forcing + (split.forcing_tilde, undo), pressure=pressure)


__all__ = [
    "DensityForcing",
    "ForcedSolution",
    "ForcingSpec",
    "PlaneWaveForcing",
    "PressureForcingSplit",
    "StabilityReport",
    "apply_pressure_forcing",
    "asymptotic_stability_check",
    "build_forced_solution",
    "decompose_pressure_forcing",
    "steady_state_from_forcing",
]
