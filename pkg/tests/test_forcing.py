import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import families
from planewave_flows import flows as F
from planewave_flows import forcing as G
from planewave_flows.calculus import advective_term, eval_jet
from planewave_flows.core import (
    ConstraintError,
    IncompatibleForcingError,
    ModelParams,
    RegimeError,
    StructuralError,
    UnsupportedShapeError,
)
from planewave_flows.fields import FlowField, PlaneWaveComponent, evaluate_values
from planewave_flows.residuals import residual_forced, sample_grid
from planewave_flows.shapes import FourierSum, GaussianKernel, SineMode

E3 = (0, 0, 1)
K1 = (1, 0, 0)


def pts(n=3, count=200, seed=11, tmax=2.0):
    r = np.random.default_rng(seed)
    return r.uniform(0, tmax, count), r.uniform(-math.pi, math.pi, (count, n))


def single_forcing(beta=1.0, k=K1, a=E3):
    return G.PlaneWaveForcing([PlaneWaveComponent(a, k, SineMode(beta))])


class TestForcedSolution:
    def test_single_mode_from_rest(self):
        # nu = 1, |k| = 1: v = (1 - e^{-t}) sin(x1) e3
        sol = G.build_forced_solution(None, single_forcing(), ModelParams(nu=1.0))
        t, x = pts()
        expected = ((1 - np.exp(-t)) * np.sin(x[:, 0]))[:, None] * np.array(E3)
        assert np.max(np.abs(sol.velocity(t, x) - expected)) <= 1e-14

    def test_zero_forcing_is_homogeneous(self):
        p = ModelParams(nu=0.2)
        v0 = F.transverse_spec(p, [(E3, [(K1, SineMode(1.0)), ((0, 2, 0), SineMode(0.5))])])
        sol = G.build_forced_solution(v0, G.PlaneWaveForcing([]))
        t, x = pts()
        assert np.array_equal(sol.velocity(t, x), F.build_transverse(v0).velocity_at(t, x))
        assert sol.steady is None and not sol.unbounded_growth

    def test_initial_value_is_exact(self):
        forcing, v0, p = families.density_example()
        sol = G.build_forced_solution(v0, forcing, p)
        _, x = pts()
        assert np.array_equal(sol.velocity(np.zeros(len(x)), x), F.build_transverse(v0).velocity_at(0.0, x) + 0.0 * x)

    @pytest.mark.parametrize("name", ["forced_single", "forced_density", "forced_interacting"])
    def test_forced_residual_vanishes(self, name):
        sol = families.forced_solutions()[name]
        t, x = pts(sol.field.dim)
        res = residual_forced(sol.field, None, None, t, x)
        assert np.max(np.abs(res.momentum)) <= 1e-12
        assert np.max(np.abs(res.continuity)) <= 1e-12

    @pytest.mark.parametrize("name", ["forced_single", "forced_density", "forced_interacting"])
    def test_duhamel_identity(self, name):
        sol = families.forced_solutions()[name]
        t, x = pts(sol.field.dim)
        assert np.max(np.abs(sol.velocity(t, x) - sol.duhamel_form(t, x))) <= 1e-12

    def test_homogeneous_plus_particular(self):
        sol = families.forced_solutions()["forced_density"]
        t, x = pts()
        total = sol.homogeneous.velocity_at(t, x) + sol.particular.velocity_at(t, x)
        assert np.max(np.abs(total - sol.velocity(t, x))) <= 1e-13

    def test_long_time_limit_is_steady(self):
        sol = families.forced_solutions()["forced_single"]
        _, x = pts()
        t = np.full(len(x), 60.0)
        assert np.max(np.abs(sol.velocity(t, x) - sol.steady.velocity_at(t, x))) <= 1e-12

    def test_inviscid_growth_flag(self):
        sol = G.build_forced_solution(None, single_forcing(), ModelParams(nu=0.0))
        assert sol.unbounded_growth and sol.field.meta["unbounded_growth"]
        assert sol.steady is None
        x = np.array([[math.pi / 2, 0, 0]])
        # v = t sin(x1) grows linearly
        assert sol.velocity(np.array([3.0]), x)[0, 2] == pytest.approx(3.0, rel=1e-12)
        with pytest.raises(RegimeError):
            sol.duhamel_form(1.0, x)

    def test_nonlinear_closure(self):
        # the advective term vanishes on the constrained solutions
        for name in ("forced_single", "forced_density"):
            sol = families.forced_solutions()[name]
            t, x = pts()
            assert np.max(np.abs(advective_term(sol.field, t, x))) <= 1e-12

    def test_drift_rejected(self):
        p = ModelParams(nu=0.1)
        v0 = F.transverse_spec(p, [(E3, [(K1, SineMode(1.0))])], drift=(0.1, 0, 0))
        with pytest.raises(ConstraintError):
            G.build_forced_solution(v0, single_forcing())

    def test_param_mismatch(self):
        v0 = F.transverse_spec(ModelParams(nu=0.1), [(E3, [(K1, SineMode(1.0))])])
        with pytest.raises(StructuralError):
            G.build_forced_solution(v0, single_forcing(), ModelParams(nu=0.2))

    def test_params_required(self):
        with pytest.raises(StructuralError):
            G.build_forced_solution(None, single_forcing())

    def test_dimension_mismatch(self):
        f2 = G.PlaneWaveForcing([PlaneWaveComponent((0, 1), (1, 0), SineMode(1.0))])
        with pytest.raises(StructuralError):
            G.build_forced_solution(None, f2, ModelParams(dim=3, nu=0.1))

    def test_incompatible_wavelength(self):
        p = ModelParams(dim=2, nu=0.2)
        v0 = F.interacting_spec(p, [((1, 0), (0, 1))], [1.0], [[(0.3, 1.0, 0.0), (2.0, 0.5, 0.3)]])
        forcing = G.PlaneWaveForcing([F.wave_at_angle(((1, 0), (0, 1)), 2.0, 1.1)])
        with pytest.raises(IncompatibleForcingError):
            G.build_forced_solution(v0, forcing)

    def test_unsupported_shapes(self):
        with pytest.raises(UnsupportedShapeError):
            G.build_forced_solution(None, G.PlaneWaveForcing([PlaneWaveComponent(E3, K1, GaussianKernel(1.0, 1.0))]), ModelParams())
        with pytest.raises(ConstraintError):
            G.build_forced_solution(None, G.PlaneWaveForcing([PlaneWaveComponent(E3, K1, SineMode(1.0, 1.0, 0.0, 0.5))]), ModelParams())

    def test_fourier_forcing_splits_into_modes(self):
        f = G.PlaneWaveForcing([PlaneWaveComponent(E3, K1, FourierSum((SineMode(1.0), SineMode(0.0, 2.0), SineMode(0.5, 3.0))))])
        assert [m.shape.sigma for m in f.modes()] == [1.0, 3.0]


class TestSteadyState:
    def test_unit_example(self):
        vs = G.steady_state_from_forcing(single_forcing(), ModelParams(nu=1.0))
        assert vs.velocity[0].shape.beta == 1.0

    def test_scaled_example(self):
        # alpha / (nu |k|^2) = 1 / (0.5 * 4)
        vs = G.steady_state_from_forcing(single_forcing(k=(2, 0, 0)), ModelParams(nu=0.5))
        assert vs.velocity[0].shape.beta == 0.5

    def test_steady_closes(self):
        vs = G.steady_state_from_forcing(single_forcing(k=(1, 2, 0), a=E3), ModelParams(nu=0.3))
        t, x = pts()
        res = residual_forced(vs, None, None, t, x)
        assert np.max(np.abs(res.momentum)) <= 1e-13

    def test_inviscid_rejected(self):
        with pytest.raises(RegimeError):
            G.steady_state_from_forcing(single_forcing(), ModelParams(nu=0.0))

    def test_zero_wavenumber_rejected(self):
        with pytest.raises(RegimeError):
            G.steady_state_from_forcing(single_forcing(k=(0, 0, 0)), ModelParams(nu=1.0))


class TestDensityForcing:
    def test_trapezoid_weights(self):
        d = G.DensityForcing.trapezoid(E3, K1, np.ones_like, 2.0, 5)
        np.testing.assert_allclose(d.weights, [0.25, 0.5, 0.5, 0.5, 0.25])
        # xi = 0 is dropped
        assert len(d.modes()) == 4

    def test_integrability_bound(self):
        # |alpha| w = 1, 1 for xi <= 1, then 2^2 * (2 * 0.5) at xi = 2
        d = G.DensityForcing(E3, K1, [0.5, 1.0, 2.0], [1.0, 1.0, 0.5], [1.0, -1.0, 2.0])
        assert d.integrability_bound == 6.0

    def test_validation(self):
        with pytest.raises(ConstraintError):
            G.DensityForcing(E3, (2, 0, 0), [1.0], [1.0], [1.0])
        with pytest.raises(ConstraintError):
            G.DensityForcing((1, 0, 1), K1, [1.0], [1.0], [1.0])
        with pytest.raises(StructuralError):
            G.DensityForcing(E3, K1, [-1.0], [1.0], [1.0])
        with pytest.raises(StructuralError):
            G.DensityForcing(E3, K1, [1.0], [1.0], [math.inf])
        with pytest.raises(StructuralError):
            G.DensityForcing.trapezoid(E3, K1, np.ones_like, 1.0, 1)

    def test_as_spec_matches_forcing_values(self):
        forcing, _, p = families.density_example()
        fld = F.build_transverse(forcing.as_spec(p))
        _, x = pts()
        _, _, _, fval = evaluate_values(FlowField(p, "probe", forcing=forcing.modes()), 0.0, x)
        np.testing.assert_array_equal(fld.velocity_at(0.0, x), fval)


class TestStability:
    p = ModelParams(nu=1.0)

    def test_start_at_steady_state(self):
        v0 = F.transverse_spec(self.p, [(E3, [(K1, SineMode(1.0))])])
        rep = G.asymptotic_stability_check(single_forcing(), v0, self.p, np.linspace(0, 3, 7))
        assert max(rep.deviations) <= 1e-15 and rep.passed

    def test_double_steady_state(self):
        v0 = F.transverse_spec(self.p, [(E3, [(K1, SineMode(2.0))])])
        grid = np.array([[math.pi / 2, 0, 0]])
        rep = G.asymptotic_stability_check(single_forcing(), v0, self.p, [0.0, 1.0], grid=grid)
        assert rep.deviations[1] / rep.deviations[0] == pytest.approx(math.exp(-1), rel=1e-13)
        assert rep.passed and rep.sup_bound_holds

    def test_two_modes_slowest_rate(self):
        f = G.PlaneWaveForcing([PlaneWaveComponent(E3, K1, SineMode(1.0)), PlaneWaveComponent(E3, (0, 2, 0), SineMode(1.0))])
        rep = G.asymptotic_stability_check(f, None, self.p, np.linspace(0, 4, 9))
        assert rep.kappa_min == 1.0
        assert rep.passed and rep.sup_bound_holds

    def test_density_example(self):
        forcing, v0, p = families.density_example()
        rep = G.asymptotic_stability_check(forcing, v0, p, np.linspace(0, 5, 11))
        assert rep.passed and rep.monotone
        assert all(d <= b for d, b in zip(rep.deviations, rep.bound))

    def test_inviscid_rejected(self):
        with pytest.raises(RegimeError):
            G.asymptotic_stability_check(single_forcing(), None, ModelParams(nu=0.0), [0.0, 1.0])

    def test_zero_forcing_rejected(self):
        with pytest.raises(RegimeError):
            G.asymptotic_stability_check(G.PlaneWaveForcing([]), None, self.p, [0.0, 1.0])

    @given(st.floats(0.1, 3.0), st.floats(-2.0, 2.0), st.floats(0.05, 1.0))
    def test_modal_envelope_property(self, amp, beta0, nu):
        p = ModelParams(nu=nu)
        v0 = F.transverse_spec(p, [(E3, [(K1, SineMode(beta0)), ((0, 1.5, 0), SineMode(0.3))])])
        rep = G.asymptotic_stability_check(single_forcing(amp), v0, p, np.linspace(0, 3, 7), grid=sample_grid(3, 6))
        assert rep.bound_holds


class TestPressureForcing:
    def test_zero_delta(self):
        split = G.decompose_pressure_forcing(SineMode(1.0), 0.0, K1, E3)
        assert split.pressure is None
        np.testing.assert_array_equal(split.forcing_tilde.direction, split.forcing.direction)

    def test_unit_delta(self):
        split = G.decompose_pressure_forcing(SineMode(1.0), 1.0, K1, E3)
        np.testing.assert_array_equal(split.forcing_tilde.direction, [1.0, 0.0, 1.0])
        _, x = pts()
        _, p, _, _ = evaluate_values(FlowField(ModelParams(), "probe", pressure=[split.pressure]), 0.0, x)
        np.testing.assert_allclose(p, -np.cos(x[:, 0]), atol=1e-15)

    def test_residual_identity(self):
        p = ModelParams(nu=0.4, rho0=1.7)
        split = G.decompose_pressure_forcing(SineMode(0.8, 1.0, 0.3), 0.6, (1, 1, 0), (1, -1, 2), rho0=p.rho0)
        sol = G.build_forced_solution(None, G.PlaneWaveForcing([split.forcing]), p)
        swapped = G.apply_pressure_forcing(sol.field, split)
        t, x = pts()
        plain = residual_forced(sol.field, None, None, t, x).momentum
        tilde = residual_forced(swapped, None, None, t, x).momentum
        assert np.max(np.abs(plain - tilde)) <= 1e-12
        assert np.max(np.abs(tilde)) <= 1e-12
        jet = eval_jet(swapped, t, x)
        assert np.max(np.abs(jet.forcing - eval_jet(sol.field, t, x).forcing)) > 0.1

    def test_non_orthogonal_rejected(self):
        with pytest.raises(ConstraintError):
            G.decompose_pressure_forcing(SineMode(1.0), 1.0, K1, (1, 0, 1))


@given(
    st.lists(st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(-2, 2)), min_size=1, max_size=4),
    st.floats(0.01, 1.0),
)
def test_random_forced_transverse_closes(modes, nu):
    p = ModelParams(nu=nu)
    comps = [PlaneWaveComponent(E3, (k1, k2, 0), SineMode(beta)) for k1, k2, beta in modes]
    sol = G.build_forced_solution(None, G.PlaneWaveForcing(comps), p)
    t, x = pts(count=50)
    res = residual_forced(sol.field, None, None, t, x)
    scale = 1.0 + sum(abs(b) * (1 + k1 * k1 + k2 * k2) for k1, k2, b in modes)
    assert np.max(np.abs(res.momentum)) <= 1e-12 * scale
