"""Explicit plane-wave solutions of the Euler, Navier-Stokes and rotating Boussinesq equations.

The package builds closed-form flow fields from superposed plane waves,
evaluates their exact space-time derivatives, and verifies them against the
governing equations with an analytic and an independent finite-difference
oracle.
"""

from .calculus import GradientCheck, advective_term, divergence, eval_jet, fd_jet, is_gradient_field
from .core import (
    ConstraintError,
    EvanescentError,
    FlowError,
    IncompatibleForcingError,
    IncompatibleSuperpositionError,
    ModelParams,
    RegimeError,
    StructuralError,
    SubspaceError,
    UnsupportedShapeError,
    WavelengthMismatchError,
)
from .fields import FlowField, PlaneWaveComponent, zero_field
from .flows import (
    FlowSpec,
    ValidationResult,
    add_parallel_component,
    build_horizontal_plane_boussinesq,
    build_integral_flow,
    build_interacting_horizontal_boussinesq,
    build_interacting_transverse,
    build_kolmogorov,
    build_mgw,
    build_negative_control,
    build_parallel_boussinesq,
    build_transverse,
    galilean_boost,
    interacting_spec,
    solution_space_dimension,
    superpose,
    transverse_spec,
    validate_transverse,
)
from .forcing import (
    DensityForcing,
    ForcedSolution,
    PlaneWaveForcing,
    asymptotic_stability_check,
    build_forced_solution,
    decompose_pressure_forcing,
    steady_state_from_forcing,
)
from .residuals import SamplerSpec, VerificationReport, residual, verify
from .shapes import DuhamelSine, FourierSum, GaussianKernel, Profile, SineMode, cosine_mode

__version__ = "0.1.0"
