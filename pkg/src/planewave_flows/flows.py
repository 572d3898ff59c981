"""Constructors and validators for the explicit solution families.

Every builder returns an immutable :class:`~planewave_flows.fields.FlowField`.
Frequencies are always assigned as ``omega = c . k`` from the drift ``c``;
any frequency supplied on an input component is checked against that rule.

Pressure gauge: the spatially constant part of the pressure is zero and all
primitives are taken with zero integration constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, NamedTuple, Sequence

import numpy as np

from .calculus import advection, eval_jet, is_gradient_field
from .core import (
    E3,
    LENGTH_TOL,
    ConstraintError,
    EvanescentError,
    IncompatibleSuperpositionError,
    ModelParams,
    RegimeError,
    StructuralError,
    SubspaceError,
    WavelengthMismatchError,
    as_vector,
    is_orthogonal,
    orthonormal_complement_basis,
    orthonormal_pair,
)
from .fields import (
    ConstantTerm,
    FlowField,
    InteractionGroup,
    LinearTerm,
    PairTerm,
    PlaneWaveComponent,
    ScalarWave,
)
from .shapes import DuhamelSine, CoupledMode, Profile, SineMode, WaveShape, cosine_mode

FAMILIES = (
    "transverse",
    "interacting_transverse",
    "horizontal_plane",
    "interacting_horizontal",
    "kolmogorov",
    "mgw",
    "parallel_boussinesq",
    "parallel_augmented",
    "integral",
)
OMEGA_TOL = 1e-12


# ---------------------------------------------------------------- specs


@dataclass(frozen=True, eq=False)
class FlowSpec:
    """Input description of a transverse or interacting transverse flow.

    Attributes
    ----------
    family : {"transverse", "interacting_transverse"}
    params : ModelParams
    groups : tuple of tuple of PlaneWaveComponent
        Components grouped by flow-direction index (transverse) or by
        subspace (interacting).
    drift : ndarray, optional
        Constant drift ``c``; zero by default.
    subspaces : tuple of (e1, e2) pairs
        Spanning pairs of the planes ``S_i`` (interacting family only).
    wavelengths : tuple of float
        Common wave-vector length of each subspace (interacting family only).
    reproject : bool
        Project nearly orthogonal directions onto the exact constraint
        before validating (transverse family only).
    """

    family: str
    params: ModelParams
    groups: tuple
    drift: np.ndarray | None = None
    subspaces: tuple = ()
    wavelengths: tuple = ()
    reproject: bool = False

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(tuple(g) for g in self.groups))
        drift = np.zeros(self.params.dim) if self.drift is None else self.drift
        object.__setattr__(self, "drift", as_vector(drift, self.params.dim, "drift"))
        object.__setattr__(self, "subspaces", tuple(tuple(s) for s in self.subspaces))
        object.__setattr__(self, "wavelengths", tuple(float(w) for w in self.wavelengths))

    @property
    def dim(self) -> int:
        return self.params.dim

    @property
    def components(self) -> tuple[PlaneWaveComponent, ...]:
        return tuple(w for g in self.groups for w in g)


def transverse_spec(params: ModelParams, groups, drift=None, reproject: bool = False) -> FlowSpec:
    """Transverse spec from ``[(a_i, [(k_ij, shape_ij), ...]), ...]``."""
    built = []
    for a, waves in groups:
        built.append(tuple(PlaneWaveComponent(a, k, shape) for k, shape in waves))
    return FlowSpec("transverse", params, tuple(built), drift, reproject=reproject)


def wave_at_angle(basis, wavelength: float, phi: float, beta: float = 1.0, delta: float = 0.0) -> PlaneWaveComponent:
    """Interacting component at angle ``phi`` in the plane ``span(e1, e2)``.

    ``k = lambda (cos phi e1 + sin phi e2)``, direction the in-plane rotation
    of ``k`` by a right angle, profile ``beta sin(xi + delta)``.
    """
    e1, e2 = (np.asarray(e, dtype=float) for e in basis)
    k = wavelength * (math.cos(phi) * e1 + math.sin(phi) * e2)
    a = wavelength * (-math.sin(phi) * e1 + math.cos(phi) * e2)
    return PlaneWaveComponent(a, k, SineMode(beta, 1.0, delta))


def interacting_spec(params: ModelParams, subspaces, wavelengths, groups, drift=None) -> FlowSpec:
    """Interacting spec; ``groups[i]`` lists components or ``(phi, beta, delta)`` angles."""
    built = []
    for basis, lam, group in zip(subspaces, wavelengths, groups):
        waves = []
        for item in group:
            if isinstance(item, PlaneWaveComponent):
                waves.append(item)
            else:
                phi, beta, delta = item
                waves.append(wave_at_angle(orthonormal_pair(*basis), lam, phi, beta, delta))
        built.append(tuple(waves))
    return FlowSpec("interacting_transverse", params, tuple(built), drift, subspaces, wavelengths)


@dataclass(frozen=True)
class ValidationResult:
    """Outcome of a constraint check; ``violations`` lists each failed condition."""

    passed: bool
    violations: tuple = ()

    def __bool__(self) -> bool:
        return self.passed


# ---------------------------------------------------------------- shared helpers


def _galilean(wave: PlaneWaveComponent, drift: np.ndarray) -> float:
    omega = float(np.dot(drift, wave.wavevector))
    if wave.omega is not None and abs(wave.omega - omega) > OMEGA_TOL * max(1.0, abs(omega)):
        raise ConstraintError(f"frequency {wave.omega} differs from c.k = {omega}")
    return omega


def _heat_shape(shape: WaveShape, kappa: float) -> WaveShape:
    if isinstance(shape, Profile):
        if kappa != 0.0:
            raise RegimeError("arbitrary profiles only solve the inviscid problem")
        return shape
    if not shape.heat_solution:
        raise ConstraintError(f"{type(shape).__name__} does not solve the heat equation")
    return shape.with_kappa(kappa)


def _sine_like(shape) -> bool:
    # profiles with psi'' = -psi in xi
    return isinstance(shape, (SineMode, DuhamelSine)) and shape.sigma == 1.0


def cross_terms_vanish(w: PlaneWaveComponent, u: PlaneWaveComponent) -> bool:
    """True when ``(v_w . grad) v_u`` and ``(v_u . grad) v_w`` vanish identically."""
    return is_orthogonal(w.direction, u.wavevector) and is_orthogonal(u.direction, w.wavevector)


def _in_plane(v: np.ndarray, e1: np.ndarray, e2: np.ndarray) -> bool:
    resid = v - np.dot(v, e1) * e1 - np.dot(v, e2) * e2
    return float(np.linalg.norm(resid)) <= LENGTH_TOL * max(1.0, float(np.linalg.norm(v)))


def _rotate_in_plane(k: np.ndarray, e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    return -np.dot(k, e2) * e1 + np.dot(k, e1) * e2


def pair_potential(w: PlaneWaveComponent, u: PlaneWaveComponent, coef: float, basis=None) -> PairTerm:
    """Closed-form pressure for two interacting sine waves in one plane.

    With ``a = s k_perp`` for both waves (``k_perp`` the in-plane right-angle
    rotation), ``(v_w.grad)v_u + (v_u.grad)v_w = grad h`` where
    ``h = s_w s_u [(k_w.k_u) psi_w psi_u + lambda^2 psi_w' psi_u']``.
    The returned term is ``coef * h``.

    Raises
    ------
    ConstraintError
        If the waves are not coplanar sine waves of equal wavelength.
    """
    if not (_sine_like(w.shape) and _sine_like(u.shape)):
        raise ConstraintError("interaction potentials need unit-frequency sine profiles")
    kw, ku = w.wavevector, u.wavevector
    lam = float(np.linalg.norm(kw))
    if abs(float(np.linalg.norm(ku)) - lam) > LENGTH_TOL * max(1.0, lam):
        raise WavelengthMismatchError(f"wavelengths {lam} and {np.linalg.norm(ku)} differ")
    if basis is None:
        try:
            basis = orthonormal_pair(kw, ku)
        except SubspaceError:
            basis = orthonormal_pair(kw, w.direction)
    e1, e2 = (np.asarray(e, dtype=float) for e in basis)
    for v in (kw, ku, w.direction, u.direction):
        if not _in_plane(v, e1, e2):
            raise SubspaceError("interacting waves must share one plane")
    for wave in (w, u):
        if not is_orthogonal(wave.direction, wave.wavevector):
            raise ConstraintError("interacting wave direction is not orthogonal to its wave vector")
    s_w = float(np.dot(w.direction, _rotate_in_plane(kw, e1, e2))) / lam**2
    s_u = float(np.dot(u.direction, _rotate_in_plane(ku, e1, e2))) / lam**2
    scale = coef * s_w * s_u
    return PairTerm(w, u, scale * float(np.dot(kw, ku)), scale * lam**2)


def interaction_pressure(waves: Sequence[PlaneWaveComponent], coef: float) -> list[PairTerm]:
    """Pair potentials for every pair of waves with non-vanishing cross terms."""
    terms = []
    for i in range(len(waves)):
        for j in range(i + 1, len(waves)):
            if not cross_terms_vanish(waves[i], waves[j]):
                terms.append(pair_potential(waves[i], waves[j], coef))
    return terms


def _pressure_coef(params: ModelParams, system: str) -> float:
    return -params.rho0 if system == "navier_stokes" else -1.0


# ---------------------------------------------------------------- transverse


def _prepared_transverse(spec: FlowSpec) -> list[list[PlaneWaveComponent]]:
    n = spec.dim
    groups = []
    for g in spec.groups:
        comps = []
        for w in g:
            if w.dim != n or w.wavevector.shape[0] != n:
                raise StructuralError(f"component of dimension {w.dim} in a {n}-dimensional spec")
            comps.append(w)
        groups.append(comps)
    if not spec.reproject:
        return groups
    # remove the component of each direction along every wave vector (near-orthogonal inputs only)
    ks = [w.wavevector for g in groups for w in g if np.any(w.wavevector)]
    basis = _orthonormal_span(ks)
    out = []
    for g in groups:
        fixed = []
        for w in g:
            a = np.array(w.direction)
            for e in basis:
                a = a - np.dot(a, e) * e
            if np.linalg.norm(w.direction - a) > 1e-6 * np.linalg.norm(w.direction):
                raise ConstraintError("reproject only corrects directions that are already nearly orthogonal")
            fixed.append(replace(w, direction=a))
        out.append(fixed)
    return out


def _orthonormal_span(vectors) -> list[np.ndarray]:
    if not vectors:
        return []
    u, s, _ = np.linalg.svd(np.vstack(vectors).T, full_matrices=False)
    rank = int(np.sum(s > 1e-12 * s[0]))
    return [u[:, i] for i in range(rank)]


def validate_transverse(spec: FlowSpec) -> ValidationResult:
    """Check the orthogonality and heat-equation conditions of a transverse spec.

    Raises
    ------
    StructuralError
        Wrong family, ``N >= n`` or vectors of the wrong dimension.
    """
    if spec.family != "transverse":
        raise StructuralError(f"expected a transverse spec, got {spec.family!r}")
    n = spec.dim
    if not 1 <= len(spec.groups) < n:
        raise StructuralError(f"a transverse flow needs 1 <= N < n, got N={len(spec.groups)}, n={n}")
    groups = _prepared_transverse(spec)
    nu = spec.params.nu
    violations = []
    flat = [(i, j, w) for i, g in enumerate(groups) for j, w in enumerate(g)]
    for i, _, w in flat:
        for j, l, u in flat:
            if not is_orthogonal(w.direction, u.wavevector):
                violations.append({"kind": "orthogonality", "direction": i, "wave": (j, l), "dot": float(np.dot(w.direction, u.wavevector))})
    for i, j, w in flat:
        kappa = nu * float(np.dot(w.wavevector, w.wavevector))
        if isinstance(w.shape, Profile):
            if kappa != 0.0:
                violations.append({"kind": "heat", "wave": (i, j), "reason": "arbitrary profile needs nu == 0"})
        elif not w.shape.heat_solution:
            violations.append({"kind": "heat", "wave": (i, j), "reason": f"{type(w.shape).__name__} is not a heat solution"})
        try:
            _galilean(w, spec.drift)
        except ConstraintError as exc:
            violations.append({"kind": "frequency", "wave": (i, j), "reason": str(exc)})
    return ValidationResult(not violations, tuple(violations))


def build_transverse(spec: FlowSpec) -> FlowField:
    """Superposed plane waves with every direction orthogonal to every wave vector.

    The advective term reduces to ``sum (c.k) d_xi psi a``, which the
    Galilean frequency ``omega = c.k`` absorbs, so the pressure is constant.
    """
    result = validate_transverse(spec)
    if not result.passed:
        raise ConstraintError(f"transverse constraints violated: {list(result.violations)}")
    nu = spec.params.nu
    waves = []
    for g in _prepared_transverse(spec):
        for w in g:
            kappa = nu * float(np.dot(w.wavevector, w.wavevector))
            waves.append(PlaneWaveComponent(w.direction, w.wavevector, _heat_shape(w.shape, kappa), _galilean(w, spec.drift)))
    return FlowField(
        spec.params,
        "transverse",
        velocity=waves,
        drift=spec.drift,
        meta={"N": len(spec.groups), "M": tuple(len(g) for g in spec.groups)},
    )


# ---------------------------------------------------------------- interacting transverse


def _interacting_checked(spec: FlowSpec):
    n = spec.dim
    big_n = len(spec.groups)
    if not (1 <= big_n and 2 * big_n <= n):
        raise StructuralError(f"interacting flows need 1 <= N <= n/2, got N={big_n}, n={n}")
    if len(spec.subspaces) != big_n or len(spec.wavelengths) != big_n:
        raise StructuralError("one subspace and one wavelength per group are required")
    bases = []
    for pair in spec.subspaces:
        if len(pair) != 2 or any(np.asarray(e).shape != (n,) for e in pair):
            raise StructuralError(f"subspaces must be pairs of vectors in R^{n}")
        bases.append(orthonormal_pair(*pair))
    for i in range(big_n):
        for j in range(i + 1, big_n):
            for e in bases[i]:
                for g in bases[j]:
                    if abs(float(np.dot(e, g))) > LENGTH_TOL:
                        raise SubspaceError(f"subspaces {i} and {j} are not orthogonal")
    for i, (group, lam) in enumerate(zip(spec.groups, spec.wavelengths)):
        if not lam > 0:
            raise StructuralError("wavelengths must be positive")
        e1, e2 = bases[i]
        for j, w in enumerate(group):
            if w.dim != n:
                raise StructuralError(f"component of dimension {w.dim} in a {n}-dimensional spec")
            if not (_in_plane(w.wavevector, e1, e2) and _in_plane(w.direction, e1, e2)):
                raise SubspaceError(f"component ({i}, {j}) leaves its subspace")
            norm = float(np.linalg.norm(w.wavevector))
            if abs(norm - lam) > LENGTH_TOL * lam:
                raise WavelengthMismatchError(f"|k| = {norm} for component ({i}, {j}) but lambda = {lam}")
            if not is_orthogonal(w.direction, w.wavevector):
                raise ConstraintError(f"component ({i}, {j}) has a . k != 0")
            if not (isinstance(w.shape, SineMode) and w.shape.sigma == 1.0):
                raise ConstraintError(f"component ({i}, {j}) must be a unit-frequency sine mode")
    return bases


def validate_interacting(spec: FlowSpec) -> ValidationResult:
    try:
        _interacting_checked(spec)
    except ConstraintError as exc:
        return ValidationResult(False, ({"kind": type(exc).__name__, "reason": str(exc)},))
    return ValidationResult(True)


def build_interacting_transverse(spec: FlowSpec) -> FlowField:
    """Equal-wavelength waves in mutually orthogonal planes with interaction pressure.

    Within each plane the advective term is ``grad h``; the pressure is
    ``-rho0 h`` with ``h`` summed over pairs inside each plane only.
    """
    if spec.family != "interacting_transverse":
        raise StructuralError(f"expected an interacting spec, got {spec.family!r}")
    bases = _interacting_checked(spec)
    params = spec.params
    coef = -params.rho0
    waves = []
    pressure = []
    groups = []
    for basis, lam, group in zip(bases, spec.wavelengths, spec.groups):
        built = tuple(
            PlaneWaveComponent(w.direction, w.wavevector, w.shape.with_kappa(params.nu * lam**2), _galilean(w, spec.drift))
            for w in group
        )
        waves.extend(built)
        for i in range(len(built)):
            for j in range(i + 1, len(built)):
                pressure.append(pair_potential(built[i], built[j], coef, basis))
        groups.append(InteractionGroup(basis, lam, built, coef))
    return FlowField(
        params,
        "interacting_transverse",
        velocity=waves,
        drift=spec.drift,
        pressure=pressure,
        meta={"groups": tuple(groups), "N": len(groups), "M": tuple(len(g) for g in spec.groups)},
    )


# ---------------------------------------------------------------- Boussinesq families


def _require_boussinesq(params: ModelParams):
    if params.dim != 3:
        raise StructuralError("Boussinesq families are posed on R^3")


def _vertical_terms(btilde: WaveShape | None, c3: float, params: ModelParams):
    """Buoyancy ``b(t, z)`` and its pressure primitive ``B`` with ``dB/dz = b``."""
    if btilde is None:
        return [], []
    if c3 != 0.0 and params.strat != 0.0:
        raise ConstraintError("a vertical drift with a buoyancy profile needs strat == 0")
    shape = _heat_shape(btilde, params.mu)
    b = ScalarWave(E3, c3, shape)
    big_b = ScalarWave(E3, c3, shape.primitive())
    return [b], [big_b]


def _drift_pressure(c: np.ndarray, params: ModelParams) -> list:
    if params.f == 0.0 or not np.any(c[:2]):
        return []
    return [LinearTerm(params.f * np.array([c[1], -c[0], 0.0]))]


def build_horizontal_plane_boussinesq(k2, shape: WaveShape, btilde: WaveShape | None = None, c=None, params: ModelParams | None = None) -> FlowField:
    """Single horizontal plane wave over a vertical buoyancy profile.

    ``v = psi(t, kbar.x - omega t) abar + c`` with ``abar = kbar x e3`` so that
    ``kbar = e3 x abar``; ``p = -f Psi + B(t, z) + f (c2 x - c1 y)``.
    """
    params = ModelParams() if params is None else params
    _require_boussinesq(params)
    k2 = as_vector(k2, 2, "k2")
    kbar = np.array([k2[0], k2[1], 0.0])
    if not np.any(kbar):
        raise StructuralError("horizontal wave vector must be non-zero")
    c = as_vector(np.zeros(3) if c is None else c, 3, "c")
    abar = np.array([k2[1], -k2[0], 0.0])
    omega = float(np.dot(c, kbar))
    vshape = _heat_shape(shape, params.nu * float(np.dot(kbar, kbar)))
    wave = PlaneWaveComponent(abar, kbar, vshape, omega)
    pressure = []
    if params.f != 0.0:
        pressure.append(ScalarWave(kbar, omega, vshape.primitive(), scale=-params.f))
    buoy, big_b = _vertical_terms(btilde, float(c[2]), params)
    pressure += big_b + _drift_pressure(c, params)
    return FlowField(params, "horizontal_plane", "boussinesq", velocity=[wave], drift=c, pressure=pressure, buoyancy=buoy)


def build_interacting_horizontal_boussinesq(components, btilde: WaveShape | None = None, c=None, params: ModelParams | None = None) -> FlowField:
    """N equal-wavelength horizontal sine waves with interaction and Coriolis pressure.

    Parameters
    ----------
    components : sequence of (k2, beta, delta)
        Horizontal wave vectors (all of equal length), amplitudes and phases.
        Each wave flows along ``(-k_y, k_x, 0)``.
    """
    params = ModelParams() if params is None else params
    _require_boussinesq(params)
    comps = [(as_vector(k2, 2, "k2"), float(beta), float(delta)) for k2, beta, delta in components]
    if not comps:
        raise StructuralError("at least one horizontal wave is required")
    lam = float(np.linalg.norm(comps[0][0]))
    if lam == 0.0:
        raise StructuralError("horizontal wave vectors must be non-zero")
    c = as_vector(np.zeros(3) if c is None else c, 3, "c")
    kappa = params.nu * lam**2
    waves = []
    for k2, beta, delta in comps:
        if abs(float(np.linalg.norm(k2)) - lam) > LENGTH_TOL * lam:
            raise WavelengthMismatchError(f"|k| = {np.linalg.norm(k2)} differs from {lam}")
        kbar = np.array([k2[0], k2[1], 0.0])
        direction = np.array([-k2[1], k2[0], 0.0])
        waves.append(PlaneWaveComponent(direction, kbar, SineMode(beta, 1.0, delta, kappa), float(np.dot(c, kbar))))
    basis = (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))
    pressure: list = []
    for i in range(len(waves)):
        for j in range(i + 1, len(waves)):
            pressure.append(pair_potential(waves[i], waves[j], -1.0, basis))
    if params.f != 0.0:
        # e3 x (psi kbar_perp) = -psi kbar, balanced by +f Psi
        pressure += [ScalarWave(w.wavevector, w.omega, w.shape.primitive(), scale=params.f) for w in waves]
    buoy, big_b = _vertical_terms(btilde, float(c[2]), params)
    pressure += big_b + _drift_pressure(c, params)
    group = InteractionGroup(basis, lam, tuple(waves), -1.0)
    return FlowField(
        params,
        "interacting_horizontal",
        "boussinesq",
        velocity=waves,
        drift=c,
        pressure=pressure,
        buoyancy=buoy,
        meta={"groups": (group,), "N": len(waves)},
    )


def build_kolmogorov(k: float, m: float, alpha: float, beta_forcing: float = 0.0, params: ModelParams | None = None):
    """Steady single-mode stratified flow ``v = alpha cos(kx - mz) (m, 0, k)``.

    With forcing ``F = beta v`` the balance needs
    ``strat = mu |K|^2 (nu |K|^2 - beta)(1 + m^2/k^2)``, ``|K|^2 = k^2 + m^2``.

    Returns
    -------
    field : FlowField
        Carries the forcing (if any) and ``meta["strat_matched"]``.
    required_strat : float
    """
    params = ModelParams() if params is None else params
    _require_boussinesq(params)
    if params.f != 0.0:
        raise RegimeError("the Kolmogorov family is non-rotating (f == 0)")
    k, m, alpha, beta = float(k), float(m), float(alpha), float(beta_forcing)
    if k == 0.0:
        raise StructuralError("k == 0 makes the pressure and buoyancy singular")
    kvec = np.array([k, 0.0, -m])
    direction = np.array([m, 0.0, k])
    k2 = k * k + m * m
    gap = params.nu * k2 - beta
    required = params.mu * k2 * gap * (1.0 + m * m / (k * k))
    velocity = [PlaneWaveComponent(direction, kvec, cosine_mode(alpha), 0.0)]
    pressure = [ScalarWave(kvec, 0.0, SineMode(-alpha * gap * m / k))]
    buoyancy = [ScalarWave(kvec, 0.0, cosine_mode(alpha * gap * (k + m * m / k)))]
    forcing = [PlaneWaveComponent(direction, kvec, cosine_mode(alpha * beta), 0.0)] if beta != 0.0 else []
    matched = alpha == 0.0 or abs(params.strat - required) <= 1e-9
    field_ = FlowField(
        params,
        "kolmogorov",
        "boussinesq",
        velocity=velocity,
        pressure=pressure,
        buoyancy=buoyancy,
        forcing=forcing,
        meta={"required_strat": required, "strat_matched": matched, "forcing_amplitude": beta},
    )
    return field_, required


def mgw_frequency_squared(k: float, m: float, params: ModelParams) -> float:
    return (-params.strat * k * k + params.f**2 * m * m) / (k * k + m * m)


def _mgw_pressure_amplitude(alpha: float, k: float, m: float, omega: float, f: float) -> float:
    return alpha * m * (omega * omega - f * f) / (k * omega)


def build_mgw(k: float, m: float, alpha: float, branch: int = 1, params: ModelParams | None = None) -> FlowField:
    """Monochromatic inertia-gravity wave with phase ``kx - mz - omega t``.

    ``omega^2 = (-strat k^2 + f^2 m^2) / (k^2 + m^2)`` and ``omega`` takes the
    sign of ``branch``.  With ``nu == mu`` every term decays like
    ``exp(-nu (k^2 + m^2) t)``.

    Raises
    ------
    EvanescentError
        If ``omega^2 <= 0``.
    RegimeError
        If the wave is viscous or diffusive with ``nu != mu``.
    """
    params = ModelParams() if params is None else params
    _require_boussinesq(params)
    k, m, alpha = float(k), float(m), float(alpha)
    if branch not in (1, -1):
        raise StructuralError("branch must be +1 or -1")
    if k == 0.0:
        raise StructuralError("k == 0 makes the pressure singular")
    omega2 = mgw_frequency_squared(k, m, params)
    if not omega2 > 0.0:
        raise EvanescentError(f"omega^2 = {omega2} <= 0: no propagating wave")
    if not params.inviscid and params.nu != params.mu:
        raise RegimeError("decaying inertia-gravity waves need nu == mu")
    omega = branch * math.sqrt(omega2)
    kvec = np.array([k, 0.0, -m])
    kappa = params.nu * (k * k + m * m)
    velocity = [PlaneWaveComponent(np.array([m, 0.0, k]), kvec, cosine_mode(alpha, kappa=kappa), omega)]
    if params.f != 0.0:
        velocity.append(PlaneWaveComponent(np.array([0.0, 1.0, 0.0]), kvec, SineMode(alpha * m * params.f / omega, kappa=kappa), omega))
    p_amp = _mgw_pressure_amplitude(alpha, k, m, omega, params.f)
    pressure = [ScalarWave(kvec, omega, cosine_mode(p_amp, kappa=kappa))]
    buoyancy = [ScalarWave(kvec, omega, SineMode(-alpha * k * params.strat / omega, kappa=kappa))]
    return FlowField(
        params,
        "mgw",
        "boussinesq",
        velocity=velocity,
        pressure=pressure,
        buoyancy=buoyancy,
        meta={"omega2": omega2, "omega": omega, "decay_rate": kappa},
    )


def build_parallel_boussinesq(modes, p0: float = 0.0, params: ModelParams | None = None) -> FlowField:
    """Vertical flow ``w(t, x, y) e3`` coupled to buoyancy, mode by mode.

    Parameters
    ----------
    modes : sequence of (k2, w0, b0) or (k2, w0, b0, phase)
        Each mode is ``cos(k2 . (x, y) + phase)`` in both ``w`` and ``b`` with
        amplitudes ``exp(tA) (w0, b0)``,
        ``A = [[-nu K^2, 1], [strat, -mu K^2]]``, ``K = |k2|``.
    p0 : float
        Constant buoyancy ``b = p0`` balanced by the pressure ``p0 z``.
    """
    params = ModelParams() if params is None else params
    _require_boussinesq(params)
    velocity = []
    buoyancy = []
    for mode in modes:
        k2, w0, b0 = mode[:3]
        phase = float(mode[3]) if len(mode) > 3 else 0.0
        k2 = as_vector(k2, 2, "k2")
        kk = float(np.dot(k2, k2))
        mat = ((-params.nu * kk, 1.0), (params.strat, -params.mu * kk))
        kvec = np.array([k2[0], k2[1], 0.0])
        delta = 0.5 * math.pi + phase
        y0 = (float(w0), float(b0))
        velocity.append(PlaneWaveComponent(E3, kvec, CoupledMode(mat, y0, 0, 1.0, delta), 0.0))
        buoyancy.append(ScalarWave(kvec, 0.0, CoupledMode(mat, y0, 1, 1.0, delta)))
    pressure = []
    if p0 != 0.0:
        buoyancy.append(ConstantTerm(float(p0)))
        pressure.append(LinearTerm(np.array([0.0, 0.0, float(p0)])))
    return FlowField(params, "parallel_boussinesq", "boussinesq", velocity=velocity, pressure=pressure, buoyancy=buoyancy, meta={"p0": float(p0)})


# ---------------------------------------------------------------- combinators


class DimensionCount(NamedTuple):
    core: int
    bonus: int


def solution_space_dimension(family: str, n: int, N: int, M=()) -> DimensionCount:
    """Dimension of a solution family and its separate symmetry bonus.

    ``M`` is the list of group sizes (or their total ``m_N``).  Families:
    ``transverse`` gives ``N + (n - N + 1) m_N`` plus ``2n - N``,
    ``interacting_transverse`` gives ``3 m_N`` plus ``n``,
    ``interacting_horizontal`` gives ``3N + 1`` plus ``3`` and
    ``horizontal_plane`` gives ``4`` plus ``4``.
    """
    m_total = int(M) if np.isscalar(M) else int(sum(M))
    if m_total < 0 or n < 2:
        raise StructuralError("need n >= 2 and non-negative group sizes")
    if family == "transverse":
        if not 1 <= N < n:
            raise StructuralError(f"transverse flows need 1 <= N < n, got N={N}, n={n}")
        return DimensionCount(N + (n - N + 1) * m_total, 2 * n - N)
    if family == "interacting_transverse":
        if not 1 <= N <= n // 2:
            raise StructuralError(f"interacting flows need 1 <= N <= n/2, got N={N}, n={n}")
        return DimensionCount(3 * m_total, n)
    if family == "interacting_horizontal":
        if n != 3 or N < 1:
            raise StructuralError("interacting horizontal flows live in R^3 with N >= 1 waves")
        return DimensionCount(3 * N + 1, 3)
    if family == "horizontal_plane":
        if n != 3:
            raise StructuralError("horizontal plane flows live in R^3")
        return DimensionCount(4, 4)
    raise StructuralError(f"no dimension count for family {family!r}")


def _probe_cross_terms(fi: FlowField, fj: FlowField, t, x):
    ji = eval_jet(fi, t, x)
    jj = eval_jet(fj, t, x)
    vi, vj = ji.velocity, jj.velocity
    # drifts are part of the linear terms, so only wave parts interact
    wi = vi.value - fi.drift
    wj = vj.value - fj.drift
    cross_v = advection(wi, vj.gradient) + advection(wj, vi.gradient)
    cross_b = advection(wi, jj.buoyancy.gradient[..., None, :])[..., 0] + advection(wj, ji.buoyancy.gradient[..., None, :])[..., 0]
    cross_drift = advection(fi.drift[None, :] * np.ones_like(wi), vj.gradient) + advection(fj.drift[None, :] * np.ones_like(wj), vi.gradient)
    return cross_v, cross_b, cross_drift


def _witness(values: np.ndarray, t, x) -> dict:
    norms = np.abs(values) if values.ndim == 1 else np.linalg.norm(values, axis=1)
    idx = int(np.argmax(norms))
    return {"t": float(t[idx]), "x": x[idx].tolist(), "value": float(norms[idx])}


def superpose(fields: Sequence[FlowField], probe=None, tol: float = 1e-9, check: bool = True) -> FlowField:
    """Sum of solution fields, with the pressure corrected where possible.

    Cross advective terms of every pair are probed at seeded sample points.
    Pairs whose cross terms vanish add pressures unchanged; coplanar
    equal-wavelength sine waves gain the closed-form interaction potential.
    Any other pair is rejected.

    Parameters
    ----------
    fields : sequence of FlowField
        Must share parameters and system.  Drifts must vanish except on one
        field at most, or all fields must be drift-free along each other's
        wave vectors.
    probe : SamplerSpec, optional
        Probe sample (default 64 seeded points).
    check : bool
        With ``False`` the raw sum is returned, flagged ``unchecked``.

    Raises
    ------
    IncompatibleSuperpositionError
        With the offending pair and the witness sample.
    """
    from .residuals import SamplerSpec

    fields = list(fields)
    if not fields:
        raise StructuralError("nothing to superpose")
    base = fields[0]
    for f_ in fields[1:]:
        if f_.params != base.params or f_.system != base.system:
            raise StructuralError("superposed fields must share parameters and system")
    coef = _pressure_coef(base.params, base.system)
    scale = 1.0 / base.params.rho0 if base.system == "navier_stokes" else 1.0

    extra: list = []
    if check:
        probe = SamplerSpec(count=64, seed=7) if probe is None else probe
        t, x = probe.draw(base.dim)
        for i in range(len(fields)):
            for j in range(i + 1, len(fields)):
                extra += _pair_pressure(fields, i, j, t, x, tol, coef, scale)

    groups = _merge_groups([g for f_ in fields for g in f_.meta.get("groups", ())])
    meta: dict[str, Any] = {"components": tuple(f_.family for f_ in fields)}
    if groups:
        meta["groups"] = groups
    if not check:
        meta["unchecked"] = True
    if any(f_.non_solution for f_ in fields):
        meta["non_solution"] = True
    return FlowField(
        base.params,
        "superposition(" + "+".join(f_.family for f_ in fields) + ")",
        base.system,
        velocity=[w for f_ in fields for w in f_.velocity],
        drift=sum((f_.drift for f_ in fields), np.zeros(base.dim)),
        pressure=[p for f_ in fields for p in f_.pressure] + extra,
        buoyancy=[b for f_ in fields for b in f_.buoyancy],
        forcing=[w for f_ in fields for w in f_.forcing],
        meta=meta,
    )


def _pair_pressure(fields, i, j, t, x, tol, coef, scale) -> list:
    fi, fj = fields[i], fields[j]
    cross_v, cross_b, cross_drift = _probe_cross_terms(fi, fj, t, x)
    if np.max(np.abs(cross_drift)) > tol:
        raise IncompatibleSuperpositionError(
            f"drift of one field advects the waves of the other (fields {i}, {j})", (i, j), _witness(cross_drift, t, x)
        )
    if np.max(np.abs(cross_v)) <= tol:
        _check_buoyancy(cross_b, i, j, t, x, tol)
        return []
    terms = []
    for w in fi.velocity:
        for u in fj.velocity:
            if cross_terms_vanish(w, u):
                continue
            try:
                terms.append(pair_potential(w, u, coef))
            except ConstraintError:
                # partners of parallel components cancel in aggregate; checked below
                continue
    probe_field = FlowField(fi.params, "probe", fi.system, pressure=terms)
    grad = eval_jet(probe_field, t, x).pressure_gradient
    remainder = cross_v + scale * grad
    if np.max(np.abs(remainder)) <= tol * max(1.0, float(np.max(np.abs(cross_v)))):
        _check_buoyancy(cross_b, i, j, t, x, tol)
        return terms
    check = is_gradient_field(lambda tt, xx: _cross_only(fi, fj, tt, xx), (t, x))
    kind = "a gradient without a closed-form potential" if check.is_gradient else "not a gradient"
    raise IncompatibleSuperpositionError(
        f"cross advective term of fields {i} and {j} is {kind}", (i, j), _witness(remainder, t, x)
    )


def _check_buoyancy(cross_b, i, j, t, x, tol):
    if np.max(np.abs(cross_b)) > tol:
        raise IncompatibleSuperpositionError(f"buoyancy cross transport does not vanish (fields {i}, {j})", (i, j), _witness(cross_b, t, x))


def _cross_only(fi, fj, t, x):
    return _probe_cross_terms(fi, fj, t, x)[0]


def _merge_groups(groups) -> tuple:
    merged: list[InteractionGroup] = []
    for g in groups:
        for idx, h in enumerate(merged):
            if h.same_plane(g) and abs(h.wavelength - g.wavelength) <= LENGTH_TOL * h.wavelength:
                merged[idx] = replace(h, waves=h.waves + g.waves)
                break
        else:
            merged.append(g)
    return tuple(merged)


def add_parallel_component(field: FlowField, gamma: float, direction=None) -> FlowField:
    """Give every sine wave a cosine partner along a direction normal to its plane.

    For a wave ``beta sin(xi + delta) s k_perp`` the partner is
    ``gamma s beta cos(xi + delta) e``; cross terms of the partners cancel in
    pairs, so the pressure is unchanged.

    Parameters
    ----------
    field : FlowField
        An interacting transverse field (carries interaction groups).
    gamma : float
    direction : vector or sequence of vectors, optional
        One unit direction orthogonal to every subspace, or one per group.
        Defaults to the first vector of the common orthogonal complement.

    Raises
    ------
    StructuralError
        If no direction orthogonal to the subspaces exists or a requested
        direction mixes with a subspace.
    """
    groups = field.meta.get("groups")
    if not groups or field.system != "navier_stokes":
        raise StructuralError("parallel components extend interacting transverse flows")
    gamma = float(gamma)
    if gamma == 0.0:
        return field
    n = field.dim
    spans = [e for g in groups for e in g.basis]
    if direction is None:
        if len(spans) >= n:
            raise StructuralError("the subspaces fill R^n: no parallel direction exists")
        dirs = [orthonormal_complement_basis(spans, n)[0]] * len(groups)
    else:
        arr = np.asarray(direction, dtype=float)
        dirs = [arr] * len(groups) if arr.ndim == 1 else list(arr)
        if len(dirs) != len(groups):
            raise StructuralError("one parallel direction per group is required")
    partners = []
    for g, e in zip(groups, dirs):
        e = as_vector(e, n, "parallel direction")
        if np.linalg.norm(e) == 0 or any(abs(float(np.dot(e, s))) > LENGTH_TOL * np.linalg.norm(e) for s in spans):
            raise StructuralError("parallel direction must be orthogonal to every subspace")
        e1, e2 = g.basis
        for w in g.waves:
            lam2 = float(np.dot(w.wavevector, w.wavevector))
            s = float(np.dot(w.direction, _rotate_in_plane(w.wavevector, e1, e2))) / lam2
            shape = w.shape
            partners.append(PlaneWaveComponent(e, w.wavevector, cosine_mode(gamma * s * shape.beta, 1.0, shape.delta, shape.kappa), w.omega))
    meta = dict(field.meta)
    meta["parallel_gamma"] = gamma
    return field.replace(family="parallel_augmented", velocity=field.velocity + tuple(partners), meta=meta)


def _density_values(density, nodes: np.ndarray) -> np.ndarray:
    if callable(density):
        return np.array([float(density(p)) for p in nodes])
    arr = np.asarray(density, dtype=float)
    if arr.ndim == 0:
        return np.full(nodes.shape, float(arr))
    if arr.shape != nodes.shape:
        raise StructuralError(f"density table needs {nodes.shape[0]} node values")
    return arr


def build_integral_flow(subspaces, densities, wavelengths, Q: int, params: ModelParams, drift=None) -> FlowField:
    """Periodic trapezoidal quadrature of a continuous superposition over angles.

    Parameters
    ----------
    subspaces : sequence of (e1, e2)
    densities : sequence of (beta, delta)
        Per subspace; each entry is a callable of the angle, a constant or a
        table of ``Q`` node values.
    wavelengths : sequence of float
    Q : int
        Number of nodes ``phi_q = 2 pi q / Q`` (weight ``2 pi / Q``), at least 4.

    Notes
    -----
    The discrete sum is itself a finite interacting transverse flow, so its
    residual vanishes for every ``Q``.
    """
    if int(Q) != Q or Q < 4:
        raise StructuralError("the quadrature needs Q >= 4 nodes")
    nodes = 2.0 * math.pi * np.arange(Q) / Q
    weight = 2.0 * math.pi / Q
    groups = []
    for basis, lam, (beta, delta) in zip(subspaces, wavelengths, densities):
        b_vals = _density_values(beta, nodes) * weight
        d_vals = _density_values(delta, nodes)
        groups.append([(phi, b, d) for phi, b, d in zip(nodes, b_vals, d_vals) if b != 0.0])
    spec = interacting_spec(params, subspaces, wavelengths, groups, drift)
    if any(not g for g in spec.groups):
        raise StructuralError("every subspace needs a non-zero density")
    field_ = build_interacting_transverse(spec)
    meta = dict(field_.meta)
    meta["quadrature_order"] = int(Q)
    return field_.replace(family="integral", meta=meta)


def galilean_boost(field: FlowField, c) -> FlowField:
    """Add a constant drift ``c``; frequencies shift by ``c . k``.

    In the rotating case the drift pressure ``f (c2 x - c1 y)`` is added.
    """
    n = field.dim
    c = as_vector(c, n, "boost")
    if field.system == "boussinesq" and c[2] != 0.0 and field.params.strat != 0.0:
        raise ConstraintError("a vertical boost breaks the buoyancy balance when strat != 0")

    def shift(w):
        return replace(w, omega=w.omega + float(np.dot(c, w.wavevector)))

    out = field.map_waves(shift)
    pressure = out.pressure
    if field.system == "boussinesq":
        pressure = pressure + tuple(_drift_pressure(c, field.params))
    meta = dict(out.meta)
    meta["boost"] = tuple(c.tolist())
    return out.replace(drift=field.drift + c, pressure=pressure, meta=meta)


# ---------------------------------------------------------------- negative controls

NEGATIVE_KINDS = ("self_directed", "wavelength_mismatch", "orthogonality_break")


def _embed(v, n):
    out = np.zeros(n)
    out[: len(v)] = v
    return out


def build_negative_control(kind: str, params: ModelParams | None = None, wavevectors=None) -> FlowField:
    """Field that breaks exactly one family constraint, flagged ``non_solution``.

    ``self_directed``: waves flowing along their own wave vectors (divergence
    fails).  ``wavelength_mismatch``: an interacting pair with ``|k1| = 1``,
    ``|k2| = 2`` and the pressure of the equal-length formula (advective term
    is not a gradient).  ``orthogonality_break``: one wave with ``a . k = 1``.
    """
    params = ModelParams(dim=2) if params is None else params
    n = params.dim
    rho0 = params.rho0
    if kind == "self_directed":
        ks = [np.array([1.0, 0.0])] if wavevectors is None else [np.asarray(k, dtype=float) for k in wavevectors]
        waves = [PlaneWaveComponent(_embed(k, n), _embed(k, n), SineMode(1.0), 0.0) for k in ks]
        # for a single wave (v.grad)v = grad(|v|^2 / 2)
        pressure = [PairTerm(w, w, -0.5 * rho0 * float(np.dot(w.wavevector, w.wavevector)), 0.0) for w in waves]
        broken, expected = "a_i . k_i = 0", "divergence"
    elif kind == "wavelength_mismatch":
        w1 = PlaneWaveComponent(_embed([0.0, 1.0], n), _embed([1.0, 0.0], n), SineMode(1.0), 0.0)
        w2 = PlaneWaveComponent(_embed([-2.0, 0.0], n), _embed([0.0, 2.0], n), SineMode(1.0), 0.0)
        waves = [w1, w2]
        # equal-length formula evaluated with lambda = |k1|
        pressure = [PairTerm(w1, w2, -rho0 * float(np.dot(w1.wavevector, w2.wavevector)), -rho0 * 1.0)]
        broken, expected = "|k_i| = lambda", "non-gradient advective term"
    elif kind == "orthogonality_break":
        waves = [PlaneWaveComponent(_embed([1.0, 1.0], n), _embed([1.0, 0.0], n), SineMode(1.0), 0.0)]
        pressure = []
        broken, expected = "a . k = 0", "momentum residual and divergence"
    else:
        raise StructuralError(f"unknown negative control {kind!r}; choose from {NEGATIVE_KINDS}")
    return FlowField(
        params,
        f"negative_{kind}",
        velocity=waves,
        pressure=pressure,
        meta={"non_solution": True, "broken_invariant": broken, "expected_failure": expected},
    )


__all__ = [
    "DimensionCount",
    "FlowSpec",
    "ValidationResult",
    "add_parallel_component",
    "build_horizontal_plane_boussinesq",
    "build_integral_flow",
    "build_interacting_horizontal_boussinesq",
    "build_interacting_transverse",
    "build_kolmogorov",
    "build_mgw",
    "build_negative_control",
    "build_parallel_boussinesq",
    "build_transverse",
    "galilean_boost",
    "interacting_spec",
    "mgw_frequency_squared",
    "pair_potential",
    "solution_space_dimension",
    "superpose",
    "transverse_spec",
    "validate_interacting",
    "validate_transverse",
    "wave_at_angle",
]
