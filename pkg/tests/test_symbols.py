import numpy as np
import pytest

from uclab.errors import SymbolError
from uclab.symbols import (
    PhasePoint,
    WeightFn,
    anisotropic_symbol,
    bk_phi1,
    char_points_factor2,
    char_points_minus_laplacian,
    ellipticity_margin,
    laplacian_symbol,
    log_lambda_phi3,
    log_sq_phi2,
    phi1_integral,
    poisson_bracket,
    polyharmonic_symbol,
    power_alpha,
    shift_symbol,
    weight_from_id,
)

CATALOGUE = [bk_phi1(), log_sq_phi2(), log_lambda_phi3(2.0), power_alpha(1.5)]


@pytest.fixture
def points():
    """Points in the unit-to-five annulus"""
    return np.array([[1.2, 0.3], [-0.4, 2.1], [3.0, -2.5]])


class TestWeights:
    def test_phi1_integral_at_one(self):
        """int_0^1 (e^-t - 1)/t dt"""
        assert float(phi1_integral(1.0)) == pytest.approx(-0.7965995992970531, rel=1e-10)

    def test_phi1_integral_range(self):
        """The table covers [0, 10] only"""
        with pytest.raises(SymbolError):
            phi1_integral(10.5)

    def test_phi1_slope(self):
        """phi1' = -e^-r / r"""
        r = np.array([0.5, 1.0, 4.0])
        d = bk_phi1().radial_derivatives(r, 1)
        np.testing.assert_allclose(d[1], -np.exp(-r) / r, rtol=1e-12)

    @pytest.mark.parametrize('weight', CATALOGUE, ids=lambda w: w.weight_id)
    def test_radial_derivatives_match_differences(self, weight, fd):
        """Closed-form derivatives against central differences"""
        r = np.array([0.8, 1.7, 3.5])
        d = weight.radial_derivatives(r, 2)

        def value(s):
            return weight.radial_series(s, 0).value.real

        np.testing.assert_allclose(d[1], fd(value, r, 1e-6), rtol=1e-6)
        np.testing.assert_allclose(d[2], fd(value, r, 1e-4, order=2), rtol=1e-4)

    @pytest.mark.parametrize('weight', CATALOGUE, ids=lambda w: w.weight_id)
    def test_gradient_matches_differences(self, weight, points, fd):
        """Cartesian gradient of phi(|x|)"""
        grad = weight.gradient(points)
        for j in range(2):
            e = np.zeros(2)
            e[j] = 1.0
            numeric = fd(lambda h: weight.value(points + h[..., None] * e), np.zeros(len(points)), 1e-6)
            np.testing.assert_allclose(grad[:, j], numeric, rtol=1e-6, atol=1e-9)

    def test_weight_ids_round_trip(self):
        """Identifiers rebuild the same weight"""
        for weight in CATALOGUE:
            assert weight_from_id(weight.weight_id) == weight

    def test_invalid_weights(self):
        """Unknown kinds and bad parameters are refused"""
        with pytest.raises(SymbolError):
            WeightFn('quartic')
        with pytest.raises(SymbolError):
            log_lambda_phi3(0.0)
        with pytest.raises(SymbolError):
            power_alpha(-1.0)


class TestSymbols:
    def test_polyharmonic_is_power_of_laplacian(self):
        """|xi|^{2m}"""
        xi = np.array([[0.3, -1.2], [2.0, 0.5]])
        x = np.ones_like(xi)
        for m in (1, 2, 3):
            np.testing.assert_allclose(polyharmonic_symbol(m).evaluate(x, xi),
                                       np.sum(xi ** 2, axis=-1) ** m, rtol=1e-12)

    def test_ellipticity(self):
        """|xi|^2 has margin one; xi1^2 + b xi2^2 has margin min(1, b)"""
        x = np.array([[1.0, 0.0]])
        assert ellipticity_margin(laplacian_symbol(), x)[0][0] == pytest.approx(1.0)
        assert ellipticity_margin(anisotropic_symbol(0.5), x)[0][0] == pytest.approx(0.5)

    def test_shift_rejects_negative_tau(self):
        """tau >= 0"""
        with pytest.raises(SymbolError):
            shift_symbol(laplacian_symbol(), bk_phi1(), -1.0)

    def test_origin_rejected(self):
        """Phase points avoid the origin"""
        with pytest.raises(SymbolError):
            PhasePoint(np.array([[0.0, 0.0]]), np.array([[1.0, 0.0]]), 1.0)


class TestBrackets:
    def test_expanded_and_direct_substitution_agree(self, points):
        """Polynomial expansion and complex substitution give the same q"""
        xi = np.array([[0.5, 1.0], [-2.0, 0.1], [0.3, 0.3]])
        q = shift_symbol(polyharmonic_symbol(2), log_sq_phi2(), 1.7)
        np.testing.assert_allclose(q.expanded.evaluate(points, xi), q.evaluate(points, xi), rtol=1e-12)

    @pytest.mark.parametrize('weight', CATALOGUE, ids=lambda w: w.weight_id)
    def test_bracket_routes_agree(self, weight, points):
        """Chain-rule bracket equals the bracket of the expanded real and imaginary parts"""
        tau = 2.5
        xi = np.array([[0.5, 1.0], [-2.0, 0.1], [0.3, 0.3]])
        q = shift_symbol(laplacian_symbol(), weight, tau)
        expanded = poisson_bracket(q.real, q.imag, PhasePoint(points, xi, tau))
        np.testing.assert_allclose(q.bracket(points, xi), expanded.real, rtol=1e-10, atol=1e-12)

    def test_laplacian_bracket_is_hessian_form(self, points):
        """On the characteristic set the -Delta bracket is 4 tau times the Hessian form"""
        weight, tau = bk_phi1(), 3.0
        q = shift_symbol(laplacian_symbol(), weight, tau)
        grad, hess = weight.gradient(points), weight.hessian(points)
        for xi in char_points_minus_laplacian(weight, points, tau):
            form = np.einsum('...i,...ij,...j->...', xi, hess, xi)
            form = form + tau ** 2 * np.einsum('...i,...ij,...j->...', grad, hess, grad)
            np.testing.assert_allclose(q.bracket(points, xi), 4 * tau * form, rtol=1e-10)
            np.testing.assert_allclose(q.evaluate(points, xi), 0.0, atol=1e-10)

    def test_factor2_characteristic_points(self, points):
        """Factor-2 characteristic points annihilate the shifted anisotropic symbol"""
        weight, b = power_alpha(1.5), 2.0
        q = shift_symbol(anisotropic_symbol(b), weight, 1.0)
        for xi in char_points_factor2(weight, b, points):
            np.testing.assert_allclose(q.evaluate(points, xi), 0.0, atol=1e-10)
        with pytest.raises(SymbolError):
            char_points_factor2(weight, 1.0, points)
