import numpy as np
import pytest

from uclab.errors import SymbolError
from uclab.models import Verdict
from uclab.pseudoconvex import (
    alpha_threshold,
    bk_closed_form_value,
    check_condition_31,
    check_lemma33_bound,
    factor2_bracket_closed_form,
    hessian_quadratic_form,
    laplacian_bracket_scale,
)
from uclab.symbols import (
    anisotropic_symbol,
    bk_phi1,
    char_points_factor2,
    char_points_minus_laplacian,
    laplacian_symbol,
    log_lambda_phi3,
    log_sq_phi2,
    polyharmonic_symbol,
    power_alpha,
    shift_symbol,
)


@pytest.fixture
def points():
    """Sample points in the unit annulus"""
    rng = np.random.default_rng(7)
    r = rng.uniform(0.5, 1.0, 20)
    theta = rng.uniform(0, 2 * np.pi, 20)
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)


class TestClosedForms:
    def test_bk_bracket_closed_form(self, points):
        """The -Delta bracket of phi1 is 4 tau^3 e^{-3r} / r^3"""
        weight, tau = bk_phi1(), 2.0
        q = shift_symbol(laplacian_symbol(), weight, tau)
        for xi in char_points_minus_laplacian(weight, points, tau):
            np.testing.assert_allclose(hessian_quadratic_form(weight, points, xi, tau),
                                       bk_closed_form_value(points, tau), rtol=1e-10)
            np.testing.assert_allclose(q.bracket(points, xi),
                                       laplacian_bracket_scale(tau) * bk_closed_form_value(points, tau), rtol=1e-10)

    def test_factor2_bracket_on_axis(self):
        """b = 2, alpha = 3/2 at x = (1, 0): bracket 6.75, closed form 3.375"""
        x = np.array([[1.0, 0.0]])
        weight = power_alpha(1.5)
        q = shift_symbol(anisotropic_symbol(2.0), weight, 1.0)
        assert factor2_bracket_closed_form(2.0, 1.5, x)[0] == pytest.approx(3.375)
        for xi in char_points_factor2(weight, 2.0, x):
            assert q.bracket(x, xi)[0] == pytest.approx(6.75, rel=1e-10)

    def test_factor2_bracket_is_twice_closed_form(self, points):
        """Away from the axis the ratio stays two"""
        weight = power_alpha(1.5)
        q = shift_symbol(anisotropic_symbol(2.0), weight, 1.0)
        xi = char_points_factor2(weight, 2.0, points)[0]
        np.testing.assert_allclose(q.bracket(points, xi), 2 * factor2_bracket_closed_form(2.0, 1.5, points),
                                   rtol=1e-9)

    def test_alpha_threshold(self):
        """max(1/b - 1, b - 1)"""
        assert alpha_threshold(2.0) == pytest.approx(1.0)
        assert alpha_threshold(0.5) == pytest.approx(1.0)
        assert alpha_threshold(1.25) == pytest.approx(0.25)
        with pytest.raises(SymbolError):
            alpha_threshold(1.0)


class TestConditionCheck:
    def test_bk_weight_positive(self):
        """phi1 is pseudoconvex for -Delta with normalized bracket one half"""
        report = check_condition_31(laplacian_symbol(), bk_phi1(), (0.1, 9.0), 200, seed=0)
        assert report.verdict is Verdict.POSITIVE
        assert report.min_normalized_value == pytest.approx(0.5, rel=1e-8)
        assert report.sample_count == 200

    def test_log_square_skips_critical_circle(self):
        """phi2 is positive wherever its gradient is defined"""
        report = check_condition_31(laplacian_symbol(), log_sq_phi2(), (0.1, 9.0), 200, seed=0)
        assert report.verdict is Verdict.POSITIVE
        assert report.sample_count + report.skipped == 200

    def test_concave_weight_violated(self):
        """The log weight phi3 fails with a witness"""
        report = check_condition_31(laplacian_symbol(), log_lambda_phi3(1.0), (0.1, 9.0), 200, seed=0)
        assert report.verdict is Verdict.VIOLATED
        assert report.min_normalized_value < 0
        assert set(report.witness) == {'x', 'xi', 'tau'}

    @pytest.mark.parametrize('m', [2, 3])
    def test_higher_powers_vanish(self, m):
        """Powers of the Laplacian have identically vanishing brackets on their characteristic set"""
        report = check_condition_31(polyharmonic_symbol(m), bk_phi1(), (0.1, 9.0), 200, seed=0)
        assert report.verdict is Verdict.VANISHING

    def test_seeded_reproducibility(self):
        """Same seed, same report"""
        a = check_condition_31(laplacian_symbol(), bk_phi1(), (0.1, 9.0), 100, seed=5)
        b = check_condition_31(laplacian_symbol(), bk_phi1(), (0.1, 9.0), 100, seed=5)
        assert a.to_dict() == b.to_dict()

    def test_region_must_exclude_origin(self):
        """Inner radius must be positive"""
        with pytest.raises(SymbolError):
            check_condition_31(laplacian_symbol(), bk_phi1(), (0.0, 1.0), 10)


class TestFourthOrderBound:
    def test_above_threshold(self):
        """b = 2, alpha = 3/2 keeps a positive constant"""
        c_est, report = check_lemma33_bound(2.0, 1.5, (0.5, 1.0), 2000, seed=0)
        assert report.verdict is Verdict.POSITIVE
        assert c_est > 0
        assert report.extras['above_threshold']
        assert report.extras['modulus_bound_holds']
        assert report.extras['min_bracket_factor'] > 0
        assert report.extras['max_split_error'] < 1e-8

    def test_below_threshold(self):
        """alpha = 1/2 under the threshold for b = 2 loses positivity"""
        c_est, report = check_lemma33_bound(2.0, 0.5, (0.5, 1.0), 2000, seed=0)
        assert report.verdict is Verdict.VIOLATED
        assert c_est < 0
        assert report.extras['witness_factor'] == 2
        assert not report.extras['above_threshold']
