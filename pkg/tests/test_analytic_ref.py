import cmath
import math

import numpy as np
import pytest
import scipy.special

from ptsusy import analytic_ref, numerics
from ptsusy.errors import HypergeometricError, NormalizationError, ParameterError
from ptsusy.susy_core import ScarfParams, scarf2_potentials, sech


def params_for(lb, mu=1.0):
    return ScarfParams(mu, -(lb - 0.5) * mu)


class TestBoundEnergies:
    def test_table_energies(self):
        assert [e.energy for e in analytic_ref.bound_energies(1.0, 3.0)] == [-3.75, -0.75]

    def test_scale_with_mu_squared(self):
        assert [e.energy for e in analytic_ref.bound_energies(2.0, 3.0)] == [-15.0, -3.0]

    def test_shallow_well_has_one_level(self):
        levels = analytic_ref.bound_energies(1.0, 1.1)
        assert len(levels) == 1
        assert levels[0].energy == pytest.approx(0.25 - 0.01, abs=1e-15)

    @pytest.mark.parametrize("lb,count", [(1.0, 0), (1.5, 1), (2.0, 1), (2.5, 2), (3.0, 2), (4.0, 3)])
    def test_count_follows_admissibility(self, lb, count):
        assert len(analytic_ref.bound_energies(1.0, lb)) == count


class TestZeroMode:
    def test_phase_at_origin(self, table_params):
        value = complex(analytic_ref.zero_mode(table_params).evaluate(np.array([0.0]))[0])
        assert abs(value) == pytest.approx(1.0, abs=1e-15)
        assert value == pytest.approx(cmath.exp(-1.25j * math.pi), abs=1e-14)

    def test_normalization_constant(self, table_params):
        assert analytic_ref.normalize(analytic_ref.zero_mode(table_params), 1.0) == pytest.approx(
            1.0 / math.sqrt(math.pi), abs=1e-8)

    def test_derivative_is_u_psi(self, table_params):
        w = analytic_ref.zero_mode(table_params)
        x = np.linspace(-5.0, 5.0, 41)
        h = 1e-5
        fd = (w.evaluate(x + h) - w.evaluate(x - h)) / (2 * h)
        np.testing.assert_allclose(w.derivative(x), fd, atol=1e-8)

    @pytest.mark.parametrize("mu,lam", [(1.0, -2.5), (2.0, -5.0), (1.0, 0.7), (-1.0, 1.3)])
    def test_self_product_closed_form(self, mu, lam):
        p = ScarfParams(mu, lam)
        grid = numerics.make_grid(60.0 / abs(mu), 60001)
        w = numerics.sample(grid, analytic_ref.zero_mode(p).evaluate)
        numeric = numerics.inner(w, w, "bilinear")
        assert numeric == pytest.approx(analytic_ref.zero_mode_self_product(p), abs=1e-9)

    def test_self_product_vanishes_at_integer_ratio(self):
        assert abs(analytic_ref.zero_mode_self_product(ScarfParams(1.0, -2.0))) < 1e-15


class TestTable:
    def test_rejects_other_ratio(self):
        with pytest.raises(ParameterError):
            analytic_ref.table1_wavefunction("partner2", 0, ScarfParams(1.0, -2.0))

    def test_rejects_unlisted_level(self, table_params):
        with pytest.raises(ParameterError):
            analytic_ref.table1_wavefunction("partner2", 2, table_params)

    @pytest.mark.parametrize("n,energy", [(0, -3.75), (1, -0.75)])
    def test_energies(self, table_params, n, energy):
        for which in ("partner1", "partner2"):
            assert analytic_ref.table1_wavefunction(which, n, table_params).energy == energy

    def test_modulus_identity_for_ground_states(self, table_params):
        x = np.linspace(-16.0, 16.0, 1001)
        a = np.abs(analytic_ref.table1_wavefunction("partner1", 0, table_params).evaluate(x))
        b = np.abs(analytic_ref.table1_wavefunction("partner2", 0, table_params).evaluate(x))
        assert np.max(np.abs(a - b)) < 1e-12

    def test_partner2_ground_state_is_legendre(self, table_params):
        x = np.linspace(-4.0, 4.0, 81)
        table = analytic_ref.table1_wavefunction("partner2", 0, table_params).evaluate(x)
        legendre = analytic_ref.legendre_eigenfunction(0, table_params).evaluate(x)
        np.testing.assert_allclose(legendre, 3.0 * table, rtol=1e-12, atol=1e-15)

    def test_partner2_derivatives(self, table_params):
        x = np.linspace(-5.0, 5.0, 41)
        h = 1e-5
        for n in (0, 1):
            w = analytic_ref.table1_wavefunction("partner2", n, table_params)
            fd = (w.evaluate(x + h) - w.evaluate(x - h)) / (2 * h)
            np.testing.assert_allclose(w.derivative(x), fd, atol=1e-8)


class TestLegendre:
    def test_requires_integer_lambda_bar(self):
        with pytest.raises(ParameterError):
            analytic_ref.legendre_eigenfunction(0, ScarfParams(1.0, 0.7))

    def test_level_out_of_range(self):
        with pytest.raises(ParameterError):
            analytic_ref.legendre_eigenfunction(2, params_for(3.0))

    @pytest.mark.parametrize("lb,n", [(2.0, 0), (3.0, 0), (3.0, 1)])
    def test_eigenpair_residual_is_second_order(self, lb, n):
        p = params_for(lb)
        w = analytic_ref.legendre_eigenfunction(n, p)
        pair = scarf2_potentials(p)
        residuals = []
        for n_points in (4001, 8001):
            grid = numerics.default_grid(1.0, n_points)
            op = numerics.assemble(grid, pair.v2)
            residuals.append(numerics.residual(op, numerics.sample(grid, w.evaluate), w.energy, "interior"))
        assert residuals[0] < 5e-4
        assert 3.6 <= residuals[0] / residuals[1] <= 4.4

    def test_tails_keep_relative_accuracy(self):
        # l = m = 1: P_1^1(tanh x) = -sech x
        w = analytic_ref.legendre_eigenfunction(0, params_for(2.0))
        x = np.array([12.0, 16.0, 20.0, 30.0])
        s = sech(x)
        np.testing.assert_allclose(w.evaluate(x), -s, rtol=1e-13, atol=0)
        np.testing.assert_allclose(w.derivative(x), s * np.tanh(x), rtol=1e-13, atol=0)

    def test_derivative(self):
        p = params_for(4.0, mu=0.5)
        x = np.linspace(-8.0, 8.0, 41)
        h = 1e-5
        for n in range(3):
            w = analytic_ref.legendre_eigenfunction(n, p)
            fd = (w.evaluate(x + h) - w.evaluate(x - h)) / (2 * h)
            np.testing.assert_allclose(w.derivative(x), fd, atol=1e-7)


class TestHyp2f1:
    @pytest.mark.parametrize("n,z", [(1, -0.5), (2, -0.5), (3, -2.0), (4, -0.25)])
    def test_terminating_binomial(self, n, z):
        # 2F1(-n, b; b; z) = (1 - z)^n
        assert analytic_ref.hyp2f1(-n, 1.0, 1.0, z) == pytest.approx((1.0 - z) ** n, rel=1e-15)

    def test_terminating_polynomial(self):
        a, b, c, z = -2.0, 0.5, 1.5, -1.0
        exact = 1.0 + a * b / c * z + a * (a + 1) * b * (b + 1) / (c * (c + 1) * 2.0) * z * z
        assert analytic_ref.hyp2f1(a, b, c, z) == pytest.approx(exact, rel=1e-15)

    def test_log_two(self):
        assert analytic_ref.hyp2f1(1.0, 1.0, 2.0, -1.0) == pytest.approx(math.log(2.0), abs=1e-12)

    @pytest.mark.parametrize("a,b,c,z", [(0.5, 1.5, 0.5, -0.3), (1.0, 2.0, 0.5, -1.4), (1.5, 2.5, 1.5, -3.0),
                                         (0.25, 0.75, 2.0, -0.9)])
    def test_matches_scipy(self, a, b, c, z):
        assert analytic_ref.hyp2f1(a, b, c, z) == pytest.approx(scipy.special.hyp2f1(a, b, c, z), rel=1e-12)

    def test_origin(self):
        assert analytic_ref.hyp2f1(0.3, 0.4, 0.5, 0.0) == 1.0

    def test_pole_in_c(self):
        with pytest.raises(HypergeometricError):
            analytic_ref.hyp2f1(1.0, 1.0, -2.0, -0.5)

    def test_far_negative_argument(self):
        assert analytic_ref.hyp2f1(-3.0, 1.0, 1.0, -1000.0) == pytest.approx(1001.0 ** 3, rel=1e-15)
        with pytest.raises(HypergeometricError):
            analytic_ref.hyp2f1(0.5, 0.5, 1.5, -1000.0)

    def test_positive_argument_not_provided(self):
        with pytest.raises(ParameterError):
            analytic_ref.hyp2f1(1.0, 1.0, 2.0, 0.5)


class TestFlugge:
    def test_even_state_matches_oracle_shape(self, table_params):
        w = analytic_ref.flugge_eigenfunction("even", table_params, 0)
        assert w.validation is not None
        x = np.linspace(-3.0, 3.0, 61)
        values = w.evaluate(x)
        oracle = sech(x) ** 2
        c = np.vdot(oracle, values) / np.vdot(oracle, oracle)
        if w.validation.agrees:
            assert w.validation.deviation <= 1e-8
        np.testing.assert_allclose(values, c * oracle, atol=1e-8)
        assert complex(w.evaluate(np.array([0.0]))[0]) == pytest.approx(1.0, abs=1e-12)

    def test_odd_state_slope_at_origin(self, table_params):
        w = analytic_ref.flugge_eigenfunction("odd", table_params, 1)
        h = 1e-6
        slope = (w.evaluate(np.array([h]))[0] - w.evaluate(np.array([-h]))[0]) / (2 * h)
        assert complex(slope) == pytest.approx(1.0, abs=1e-6)

    def test_parity_mismatch_falls_back_to_oracle(self, table_params):
        w = analytic_ref.flugge_eigenfunction("odd", table_params, 0)
        assert not w.validation.agrees
        assert "parity" in w.validation.detail
        assert complex(w.evaluate(np.array([0.0]))[0]) == pytest.approx(1.0, abs=1e-12)

    def test_bad_parity(self, table_params):
        with pytest.raises(ParameterError):
            analytic_ref.flugge_eigenfunction("none", table_params, 0)


class TestNormalize:
    def test_table_ground_state(self, table_params):
        # integral of sech^4 is 4/3
        w = analytic_ref.table1_wavefunction("partner2", 0, table_params)
        assert analytic_ref.normalize(w, 1.0) == pytest.approx(math.sqrt(0.75), rel=1e-9)

    def test_phase_convention_for_odd_state(self, table_params):
        w = analytic_ref.normalized(analytic_ref.table1_wavefunction("partner2", 1, table_params).scaled(-1j), 1.0)
        slope = complex(np.asarray(w.derivative(np.array([0.0])))[0])
        assert slope.real > 0
        assert abs(slope.imag) < 1e-15

    def test_zero_mode_keeps_phase(self, table_params):
        w = analytic_ref.normalized(analytic_ref.zero_mode(table_params), 1.0)
        value = complex(w.evaluate(np.array([0.0]))[0])
        assert value == pytest.approx(cmath.exp(-1.25j * math.pi) / math.sqrt(math.pi), abs=1e-8)

    def test_constant_is_not_normalizable(self, table_params):
        w = analytic_ref.ClosedFormWavefunction(func=lambda x: np.ones_like(x), parity="even", n=0, kappa=0.0)
        with pytest.raises(NormalizationError):
            analytic_ref.normalize(w, 1.0)
