"""One-dimensional wave profiles psi(t, xi) with exact derivatives.

Every shape returns ``(value, d_xi, d_xi2, d_t)`` from :meth:`evaluate`.
The heat-solution shapes (:class:`SineMode`, :class:`FourierSum`,
:class:`GaussianKernel`) satisfy ``d_t == kappa * d_xi2`` identically; the
decay coefficient ``kappa`` is assigned by the flow builders
(``nu |k|^2`` for velocity, ``mu |k|^2`` for buoyancy) via
:meth:`with_kappa`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.special import erf

from .core import RegimeError, StructuralError, UnsupportedShapeError

HALF_PI = 0.5 * math.pi


class WaveShape:
    """Common interface of all wave profiles."""

    kappa: float = 0.0
    # d_t == kappa * d_xi2 holds for all t, xi
    heat_solution: bool = False

    def evaluate(self, t, xi):
        raise NotImplementedError

    def with_kappa(self, kappa: float) -> "WaveShape":
        return replace(self, kappa=float(kappa))

    def primitive(self) -> "WaveShape":
        """Antiderivative in ``xi`` with zero integration constant."""
        raise UnsupportedShapeError(f"{type(self).__name__} has no closed-form primitive")

    def scaled(self, factor: float) -> "WaveShape":
        raise NotImplementedError

    @property
    def time_independent(self) -> bool:
        return self.kappa == 0.0


@dataclass(frozen=True)
class SineMode(WaveShape):
    """``beta * exp(-kappa sigma^2 t) * sin(sigma xi + delta)``."""

    beta: float = 1.0
    sigma: float = 1.0
    delta: float = 0.0
    kappa: float = 0.0
    heat_solution = True

    def __post_init__(self):
        if not self.sigma > 0:
            raise StructuralError("SineMode frequency sigma must be positive")
        if self.kappa < 0:
            raise StructuralError("kappa must be non-negative")

    def amplitude(self, t):
        return self.beta * np.exp(-self.kappa * self.sigma**2 * np.asarray(t, dtype=float))

    def evaluate(self, t, xi):
        amp = self.amplitude(t)
        phase = self.sigma * np.asarray(xi, dtype=float) + self.delta
        s = np.sin(phase)
        c = np.cos(phase)
        value = amp * s
        d_xi = amp * self.sigma * c
        d_xi2 = -(self.sigma**2) * value
        d_t = -self.kappa * self.sigma**2 * value
        return value, d_xi, d_xi2, d_t

    def primitive(self):
        return replace(self, beta=self.beta / self.sigma, delta=self.delta - HALF_PI)

    def scaled(self, factor):
        return replace(self, beta=self.beta * factor)


def cosine_mode(beta: float = 1.0, sigma: float = 1.0, delta: float = 0.0, kappa: float = 0.0) -> SineMode:
    """``beta cos(sigma xi + delta)`` written as a phase-shifted sine."""
    return SineMode(beta, sigma, delta + HALF_PI, kappa)


@dataclass(frozen=True)
class FourierSum(WaveShape):
    """Finite sum of sine modes sharing one decay coefficient."""

    modes: tuple[SineMode, ...] = ()
    kappa: float = 0.0
    heat_solution = True

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(replace(m, kappa=self.kappa) for m in self.modes))

    def with_kappa(self, kappa):
        return FourierSum(self.modes, float(kappa))

    def evaluate(self, t, xi):
        t = np.asarray(t, dtype=float)
        xi = np.asarray(xi, dtype=float)
        shape = np.broadcast(t, xi).shape
        out = [np.zeros(shape) for _ in range(4)]
        for mode in self.modes:
            for acc, part in zip(out, mode.evaluate(t, xi)):
                acc += part
        return tuple(out)

    def primitive(self):
        return FourierSum(tuple(m.primitive() for m in self.modes), self.kappa)

    def scaled(self, factor):
        return FourierSum(tuple(m.scaled(factor) for m in self.modes), self.kappa)


@dataclass(frozen=True)
class GaussianKernel(WaveShape):
    """Heat kernel of total ``mass`` with variance ``width0^2 + 2 kappa t``."""

    mass: float = 1.0
    width0: float = 1.0
    kappa: float = 0.0
    heat_solution = True

    def __post_init__(self):
        if not self.width0 > 0:
            raise StructuralError("GaussianKernel width0 must be positive")

    def _var(self, t):
        return self.width0**2 + 2.0 * self.kappa * np.asarray(t, dtype=float)

    def evaluate(self, t, xi):
        var = self._var(t)
        xi = np.asarray(xi, dtype=float)
        value = self.mass / np.sqrt(2.0 * np.pi * var) * np.exp(-0.5 * xi**2 / var)
        d_xi = -xi / var * value
        d_xi2 = (xi**2 / var - 1.0) / var * value
        d_t = self.kappa * d_xi2
        return value, d_xi, d_xi2, d_t

    def primitive(self):
        return ErfFront(self.mass, self.width0, self.kappa)

    def scaled(self, factor):
        return replace(self, mass=self.mass * factor)


@dataclass(frozen=True)
class ErfFront(WaveShape):
    """``mass/2 * erf(xi / (sqrt(2) w(t)))``, the primitive of :class:`GaussianKernel`."""

    mass: float = 1.0
    width0: float = 1.0
    kappa: float = 0.0
    heat_solution = True

    def evaluate(self, t, xi):
        var = self.width0**2 + 2.0 * self.kappa * np.asarray(t, dtype=float)
        xi = np.asarray(xi, dtype=float)
        value = 0.5 * self.mass * erf(xi / np.sqrt(2.0 * var))
        d_xi = self.mass / np.sqrt(2.0 * np.pi * var) * np.exp(-0.5 * xi**2 / var)
        d_xi2 = -xi / var * d_xi
        d_t = self.kappa * d_xi2
        return value, d_xi, d_xi2, d_t

    def scaled(self, factor):
        return replace(self, mass=self.mass * factor)


@dataclass(frozen=True)
class Profile(WaveShape):
    """Arbitrary stationary profile; valid only in the inviscid regime.

    ``func``, ``d1`` and ``d2`` give the profile and its first two
    derivatives; ``antiderivative`` is optional and only needed where a
    pressure primitive is required.
    """

    func: Callable = None
    d1: Callable = None
    d2: Callable = None
    antiderivative: Callable | None = None
    amplitude: float = 1.0
    kappa: float = 0.0
    name: str = "profile"

    def __post_init__(self):
        if self.kappa != 0:
            raise RegimeError("arbitrary profiles solve the heat equation only when kappa == 0")

    def evaluate(self, t, xi):
        xi = np.asarray(xi, dtype=float)
        shape = np.broadcast(np.asarray(t, dtype=float), xi).shape
        a = self.amplitude
        value = np.broadcast_to(a * self.func(xi), shape).astype(float)
        d_xi = np.broadcast_to(a * self.d1(xi), shape).astype(float)
        d_xi2 = np.broadcast_to(a * self.d2(xi), shape).astype(float)
        return value, d_xi, d_xi2, np.zeros(shape)

    def primitive(self):
        if self.antiderivative is None:
            raise UnsupportedShapeError(f"profile {self.name!r} was given no antiderivative")
        inner = self.func
        return Profile(self.antiderivative, inner, self.d1, None, self.amplitude, 0.0, self.name + "_primitive")

    def scaled(self, factor):
        return replace(self, amplitude=self.amplitude * factor)

    @classmethod
    def tanh(cls, amplitude: float = 1.0, width: float = 1.0) -> "Profile":
        """Shear-layer profile ``amplitude * tanh(xi / width)``."""
        w = float(width)

        def func(x):
            return np.tanh(x / w)

        # sech^2 written as 1 - tanh^2 to avoid cosh overflow
        def d1(x):
            return (1.0 - np.tanh(x / w) ** 2) / w

        def d2(x):
            th = np.tanh(x / w)
            return -2.0 * th * (1.0 - th**2) / w**2

        def prim(x):
            # log cosh without overflow
            ax = np.abs(x / w)
            return w * (ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0))

        return cls(func, d1, d2, prim, float(amplitude), 0.0, f"tanh(w={w})")


@dataclass(frozen=True)
class DuhamelSine(WaveShape):
    """Forced sine mode ``beta * g(t) * sin(sigma xi + delta)`` started from rest.

    ``g(t) = (1 - exp(-kappa sigma^2 t)) / (kappa sigma^2)`` (``g = t`` when
    ``kappa == 0``), so ``d_t - kappa d_xi2 = beta sin(sigma xi + delta)``.
    """

    beta: float = 1.0
    sigma: float = 1.0
    delta: float = 0.0
    kappa: float = 0.0

    def _gain(self, t):
        t = np.asarray(t, dtype=float)
        rate = self.kappa * self.sigma**2
        if rate == 0.0:
            return t, np.ones_like(t)
        return -np.expm1(-rate * t) / rate, np.exp(-rate * t)

    def evaluate(self, t, xi):
        g, dg = self._gain(t)
        phase = self.sigma * np.asarray(xi, dtype=float) + self.delta
        s = np.sin(phase)
        c = np.cos(phase)
        value = self.beta * g * s
        d_xi = self.beta * g * self.sigma * c
        d_xi2 = -(self.sigma**2) * value
        d_t = self.beta * dg * s
        return value, d_xi, d_xi2, d_t

    @property
    def time_independent(self):
        return False

    def primitive(self):
        return replace(self, beta=self.beta / self.sigma, delta=self.delta - HALF_PI)

    def scaled(self, factor):
        return replace(self, beta=self.beta * factor)


def expm_2x2(a: np.ndarray, t) -> np.ndarray:
    """Closed-form ``exp(t A)`` for a real 2x2 matrix, batched over ``t``.

    Uses ``exp(tA) = e^{st} [C(t) I + S(t) (A - s I)]`` with ``s = tr(A)/2``
    and ``q^2 = s^2 - det(A)``: hyperbolic functions for real distinct
    eigenvalues, trigonometric ones for a complex pair and ``C = 1, S = t``
    for the repeated (possibly defective) eigenvalue.
    """
    a = np.asarray(a, dtype=float)
    t = np.asarray(t, dtype=float)
    s = 0.5 * (a[0, 0] + a[1, 1])
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    disc = s * s - det
    if disc > 0:
        q = math.sqrt(disc)
        c_t, s_t = np.cosh(q * t), np.sinh(q * t) / q
    elif disc < 0:
        q = math.sqrt(-disc)
        c_t, s_t = np.cos(q * t), np.sin(q * t) / q
    else:
        c_t, s_t = np.ones_like(t), t
    c_t, s_t = np.asarray(c_t), np.asarray(s_t)
    growth = np.asarray(np.exp(s * t))
    shifted = a - s * np.eye(2)
    out = c_t[..., None, None] * np.eye(2) + s_t[..., None, None] * shifted
    return growth[..., None, None] * out


@dataclass(frozen=True)
class CoupledMode(WaveShape):
    """Spatial sine whose amplitude is one component of ``exp(tA) y0``.

    Used for the coupled vertical-velocity / buoyancy modes of the parallel
    flow, where each Fourier mode obeys a 2x2 linear ODE.
    """

    matrix: tuple = ((0.0, 0.0), (0.0, 0.0))
    y0: tuple = (0.0, 0.0)
    component: int = 0
    sigma: float = 1.0
    delta: float = HALF_PI
    kappa: float = 0.0

    def amplitudes(self, t):
        a = np.asarray(self.matrix, dtype=float)
        y = expm_2x2(a, t) @ np.asarray(self.y0, dtype=float)
        dy = y @ a.T
        return y[..., self.component], dy[..., self.component]

    def evaluate(self, t, xi):
        t = np.asarray(t, dtype=float)
        amp, damp = self.amplitudes(t)
        phase = self.sigma * np.asarray(xi, dtype=float) + self.delta
        s = np.sin(phase)
        c = np.cos(phase)
        value = amp * s
        d_xi = amp * self.sigma * c
        d_xi2 = -(self.sigma**2) * value
        d_t = damp * s
        return value, d_xi, d_xi2, d_t

    @property
    def time_independent(self):
        return False

    def primitive(self):
        return replace(self, y0=tuple(v / self.sigma for v in self.y0), delta=self.delta - HALF_PI)

    def scaled(self, factor):
        return replace(self, y0=tuple(v * factor for v in self.y0))


def shape_eval(shape: WaveShape, t, xi):
    """Return ``(value, d_xi, d_xi2, d_t)`` of ``shape`` at ``(t, xi)``."""
    return shape.evaluate(t, xi)
