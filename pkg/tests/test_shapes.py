import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from planewave_flows.core import RegimeError, StructuralError, UnsupportedShapeError
from planewave_flows.shapes import (
    CoupledMode,
    DuhamelSine,
    ErfFront,
    FourierSum,
    GaussianKernel,
    Profile,
    SineMode,
    cosine_mode,
    expm_2x2,
    shape_eval,
)

HEAT_SHAPES = [
    SineMode(1.3, 2.0, 0.4, kappa=0.7),
    FourierSum((SineMode(1.0, 1.0, 0.1), SineMode(-0.5, 3.0, 1.2)), kappa=0.2),
    GaussianKernel(1.5, 0.8, kappa=0.5),
    ErfFront(1.5, 0.8, kappa=0.5),
]


def central(f, x, h):
    return (f(x + h) - f(x - h)) / (2 * h)


class TestShapeExamples:
    def test_unit_sine_at_origin(self):
        for t in (0.0, 3.7):
            value, d_xi, d_xi2, d_t = shape_eval(SineMode(1.0, 1.0, 0.0), t, 0.0)
            assert (value, d_xi, d_xi2, d_t) == (0.0, 1.0, 0.0, 0.0)

    def test_decaying_sine_value(self):
        value, _, d_xi2, d_t = shape_eval(SineMode(2.0, 1.0, 0.0, kappa=0.04), 1.0, math.pi / 2)
        # frozen: 2 exp(-0.04)
        assert value == pytest.approx(1.9215788783046464, abs=1e-15)
        assert d_t == pytest.approx(0.04 * d_xi2, abs=1e-15)

    def test_gaussian_heat_identity_at_origin(self):
        _, _, d_xi2, d_t = shape_eval(GaussianKernel(1.0, 1.0, kappa=0.5), 0.0, 0.0)
        assert d_t == pytest.approx(0.5 * d_xi2, abs=1e-15)
        # frozen: -1/sqrt(2 pi)
        assert d_xi2 == pytest.approx(-0.3989422804014327, abs=1e-15)

    def test_cosine_mode(self):
        xi = np.linspace(-3, 3, 7)
        np.testing.assert_allclose(cosine_mode(2.0).evaluate(0.0, xi)[0], 2 * np.cos(xi), atol=1e-15)

    def test_gaussian_width_grows(self):
        # variance w0^2 + 2 kappa t: peak height scales like 1/sqrt(var)
        g = GaussianKernel(1.0, 1.0, kappa=0.5)
        ratio = g.evaluate(3.0, 0.0)[0] / g.evaluate(0.0, 0.0)[0]
        assert ratio == pytest.approx(1.0 / 2.0, rel=1e-14)


class TestHeatProperty:
    @pytest.mark.parametrize("shape", HEAT_SHAPES, ids=lambda s: type(s).__name__)
    def test_heat_equation_on_random_sample(self, shape):
        r = np.random.default_rng(3)
        t = r.uniform(0, 5, 100)
        xi = r.uniform(-6, 6, 100)
        _, _, d_xi2, d_t = shape.evaluate(t, xi)
        assert np.all(np.abs(d_t - shape.kappa * d_xi2) <= 1e-12 * (1 + np.abs(d_xi2)))

    @given(
        st.floats(-3, 3),
        st.floats(0.1, 4),
        st.floats(-math.pi, math.pi),
        st.floats(0, 2),
        st.floats(0, 10),
        st.floats(-10, 10),
    )
    def test_sine_heat_property(self, beta, sigma, delta, kappa, t, xi):
        s = SineMode(beta, sigma, delta, kappa)
        _, _, d_xi2, d_t = s.evaluate(t, xi)
        assert abs(d_t - kappa * d_xi2) <= 1e-12 * (1 + abs(d_xi2))

    def test_duhamel_sine_is_forced_heat_solution(self):
        s = DuhamelSine(1.2, 1.5, 0.3, kappa=0.4)
        t = np.linspace(0, 4, 9)
        xi = np.linspace(-2, 2, 9)
        _, _, d_xi2, d_t = s.evaluate(t, xi)
        source = 1.2 * np.sin(1.5 * xi + 0.3)
        np.testing.assert_allclose(d_t - 0.4 * d_xi2, source, atol=1e-14)
        # starts from rest
        assert np.all(s.evaluate(0.0, xi)[0] == 0.0)

    def test_duhamel_sine_inviscid_grows_linearly(self):
        s = DuhamelSine(2.0)
        assert s.evaluate(3.0, math.pi / 2)[0] == pytest.approx(6.0, abs=1e-14)


class TestDerivativesAgainstFiniteDifferences:
    @pytest.mark.parametrize("shape", HEAT_SHAPES + [Profile.tanh(1.5, 0.7)], ids=lambda s: type(s).__name__)
    def test_second_order_convergence(self, shape):
        t0 = 0.6
        xi = np.linspace(-2.5, 2.5, 11)
        exact = shape.evaluate(t0, xi)
        errs = []
        for h in (1e-2, 1e-3):
            d_xi = central(lambda z: shape.evaluate(t0, z)[0], xi, h)
            d_xi2 = (shape.evaluate(t0, xi + h)[0] - 2 * exact[0] + shape.evaluate(t0, xi - h)[0]) / h**2
            d_t = central(lambda s: shape.evaluate(s, xi)[0], t0, h)
            errs.append(max(np.max(np.abs(d_xi - exact[1])), np.max(np.abs(d_xi2 - exact[2])), np.max(np.abs(d_t - exact[3]))))
        assert errs[1] <= 1e-5
        if errs[0] > 1e-9:
            assert math.log10(errs[0] / errs[1]) >= 1.9


class TestPrimitives:
    @pytest.mark.parametrize(
        "shape",
        [SineMode(1.3, 2.0, 0.4, kappa=0.7), HEAT_SHAPES[1], GaussianKernel(1.5, 0.8, kappa=0.5), Profile.tanh(2.0, 0.5)],
        ids=lambda s: type(s).__name__,
    )
    def test_primitive_derivative_is_shape(self, shape):
        prim = shape.primitive()
        xi = np.linspace(-4, 4, 17)
        np.testing.assert_allclose(prim.evaluate(0.8, xi)[1], shape.evaluate(0.8, xi)[0], atol=1e-13)

    def test_primitive_of_unit_sine(self):
        xi = np.linspace(-3, 3, 7)
        np.testing.assert_allclose(SineMode().primitive().evaluate(0.0, xi)[0], -np.cos(xi), atol=1e-15)

    def test_tanh_primitive_has_no_overflow(self):
        v = Profile.tanh(1.0, 0.1).primitive().evaluate(0.0, np.array([-1e3, 1e3]))[0]
        assert np.all(np.isfinite(v))
        np.testing.assert_allclose(v, [1e3 - 0.1 * math.log(2), 1e3 - 0.1 * math.log(2)], rtol=1e-12)

    def test_profile_without_antiderivative(self):
        p = Profile(np.sin, np.cos, lambda x: -np.sin(x))
        with pytest.raises(UnsupportedShapeError):
            p.primitive()


class TestValidation:
    def test_profile_rejects_viscosity(self):
        with pytest.raises(RegimeError):
            Profile.tanh().with_kappa(0.1)

    def test_sine_rejects_bad_parameters(self):
        with pytest.raises(StructuralError):
            SineMode(1.0, 0.0)
        with pytest.raises(StructuralError):
            SineMode(1.0, 1.0, 0.0, -1.0)

    def test_gaussian_rejects_zero_width(self):
        with pytest.raises(StructuralError):
            GaussianKernel(1.0, 0.0)

    def test_with_kappa_propagates_to_fourier_modes(self):
        f = HEAT_SHAPES[1].with_kappa(0.9)
        assert all(m.kappa == 0.9 for m in f.modes)


class TestMatrixExponential:
    @pytest.mark.parametrize(
        "a",
        [
            [[-0.4, 1.0], [-1.0, -0.6]],  # complex pair
            [[-0.4, 1.0], [2.0, -0.6]],  # real distinct
            [[-0.5, 1.0], [0.0, -0.5]],  # defective
            [[0.0, 0.0], [0.0, 0.0]],
        ],
    )
    def test_matches_scipy(self, a):
        for t in (0.0, 0.3, 2.0, 7.5):
            np.testing.assert_allclose(expm_2x2(np.array(a), t), scipy.linalg.expm(t * np.array(a)), rtol=1e-12, atol=1e-13)

    @given(st.lists(st.floats(-2, 2), min_size=4, max_size=4), st.floats(0, 3))
    def test_random_matrices_match_scipy(self, entries, t):
        a = np.array(entries).reshape(2, 2)
        ref = scipy.linalg.expm(t * a)
        np.testing.assert_allclose(expm_2x2(a, t), ref, rtol=1e-9, atol=1e-9 * np.max(np.abs(ref)))

    def test_batched_times(self):
        a = np.array([[-0.1, 1.0], [-1.0, -0.1]])
        t = np.array([0.0, 1.0, 2.0])
        out = expm_2x2(a, t)
        assert out.shape == (3, 2, 2)
        np.testing.assert_allclose(out[2], scipy.linalg.expm(2.0 * a), atol=1e-13)


class TestCoupledMode:
    def test_amplitudes_solve_ode(self):
        mat = ((-0.2, 1.0), (-1.0, -0.3))
        mode = CoupledMode(mat, (0.5, 0.2), 0)
        t = np.linspace(0, 3, 31)
        amp, damp = mode.amplitudes(t)
        other, _ = CoupledMode(mat, (0.5, 0.2), 1).amplitudes(t)
        np.testing.assert_allclose(damp, -0.2 * amp + other, atol=1e-14)
        np.testing.assert_allclose(np.gradient(amp, t, edge_order=2), damp, atol=5e-3)
