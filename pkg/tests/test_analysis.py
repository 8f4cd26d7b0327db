import numpy as np
import pytest

from uclab.analysis import (
    DEGREE_EXPONENT,
    angular_max,
    angular_resolution,
    decay_exponent_fit,
    decay_report,
    envelope_bounds,
    envelope_integral,
    fit_decay_exponent,
    probe_M,
    unit_ball_offsets,
)
from uclab.errors import LabError, RangeError
from uclab.meshkov import assemble_global, plan_annuli
from uclab.models import Verdict


@pytest.fixture(scope='module')
def solution():
    """Two-annulus solution from rho = 200"""
    return assemble_global(plan_annuli(200.0, 300.0))


class TestEnvelope:
    def test_integral_vanishes_at_rho(self):
        """J(rho) = 0"""
        assert envelope_integral(250.0, 250.0) == 0.0

    def test_exact_envelope(self):
        """log m = C (1 - J) gives lower == upper == C"""
        rho = 200.0
        radii = np.linspace(200.05, 201.0, 40)
        j = envelope_integral(rho, radii)
        assert j.min() < 1 < j.max()
        lower, upper = envelope_bounds(rho, radii, 3.0 * (1 - j), 0.0)
        assert lower == pytest.approx(3.0)
        assert upper == pytest.approx(3.0)

    def test_fast_decay_has_room(self):
        """Faster decay than the envelope leaves lower <= upper"""
        rho = 200.0
        radii = np.linspace(200.05, 201.0, 40)
        j = envelope_integral(rho, radii)
        lower, upper = envelope_bounds(rho, radii, -5.0 * j, 0.0)
        assert lower <= upper


class TestDecayFit:
    def test_recovers_exponent(self):
        """-log m = 2 (r / r0)^(8/7) + 1 fits back to 8/7"""
        radii = np.geomspace(250.0, 4500.0, 32)
        log_m = -(2.0 * (radii / radii[0]) ** DEGREE_EXPONENT + 1.0)
        s, c, residual = fit_decay_exponent(radii, log_m)
        assert s == pytest.approx(DEGREE_EXPONENT, rel=1e-6)
        assert c == pytest.approx(2.0, rel=1e-5)
        assert residual < 1e-8

    def test_dynamic_range(self, solution):
        """The fit window must span a factor of four"""
        with pytest.raises(RangeError):
            decay_exponent_fit(solution, 210.0, 300.0, 8)


class TestAngularMax:
    def test_inner_circle(self, solution):
        """m(rho) = a rho^-n for the pure inner mode"""
        segment = solution.segments[0]
        assert angular_max(solution, segment.rho) == pytest.approx(-segment.n * np.log(segment.rho), rel=1e-12)

    def test_under_resolution(self, solution):
        """Too few angles are refused"""
        with pytest.raises(LabError):
            angular_max(solution, 250.0, n_angles=16)
        assert angular_resolution(solution, 250.0) == 8 * (solution.segments[0].n + solution.segments[0].k)

    def test_polish_never_lowers(self, solution):
        """The refined maximum is at least the grid maximum"""
        r = solution.segments[0].rho + 2.5 * solution.segments[0].h
        assert angular_max(solution, r) >= angular_max(solution, r, polish=False)


class TestProbe:
    def test_unit_ball(self):
        """Offsets stay in the unit disk and are reproducible"""
        offsets = unit_ball_offsets(100, seed=3)
        assert offsets.shape == (100, 2)
        assert np.all(np.linalg.norm(offsets, axis=-1) <= 1.0)
        np.testing.assert_array_equal(offsets, unit_ball_offsets(100, seed=3))

    def test_probe_finite(self, solution):
        """M(R) is finite and carries its sampling parameters"""
        row = probe_M(solution, 250.0, n_centers=8, n_ball_samples=64)
        assert np.isfinite(row['log_M'])
        assert row['n_centers'] == 8

    def test_probe_range(self, solution):
        """Balls must fit inside the chain"""
        with pytest.raises(RangeError):
            probe_M(solution, 200.5)


@pytest.mark.slow
class TestDecayAcceptance:
    def test_full_chain(self):
        """200 -> 5000: exponent within the band and a single envelope constant"""
        g = assemble_global(plan_annuli(200.0, 5000.0))
        report = decay_report(g, 250.0, 4500.0, 64, probe_radii=(1000.0, 3000.0))
        assert report.verdict is Verdict.PASS
        assert abs(report.exponent - DEGREE_EXPONENT) <= 0.08
        assert report.c_env_lower <= report.c_env
