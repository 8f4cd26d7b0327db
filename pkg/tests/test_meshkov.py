import numpy as np
import pytest

from uclab.errors import ConstructionError, RangeError
from uclab.meshkov import (
    DEGREE_EXPONENT,
    GlobalSolution,
    TWO_PI,
    ZERO_DEPTH,
    assemble_global,
    audit_radii,
    audit_segment,
    build_phase,
    check_ratio_bounds,
    interface_jumps,
    plan_annuli,
    plan_log_modulus,
    single_valuedness_error,
    winding_number,
)
from uclab.operators import compose_fourth_order, extract_potential


@pytest.fixture(scope='module')
def plan():
    """Two-annulus chain from rho = 200"""
    return plan_annuli(200.0, 300.0)


@pytest.fixture(scope='module')
def solution(plan):
    """Assembled solution on the short chain"""
    return assemble_global(plan)


class TestPlan:
    def test_radii_and_degrees(self, plan):
        """rho_{j+1} = rho_j + 7 rho_j^(3/7), n_j = floor(rho_j^(8/7))"""
        assert len(plan.entries) == 2
        first, second = plan.entries
        assert second.rho == pytest.approx(first.rho + 7 * first.rho ** (3 / 7))
        assert first.n == int(np.floor(200.0 ** DEGREE_EXPONENT))
        assert first.n + first.k == second.n
        for entry in plan.entries:
            assert abs(entry.k - 8 * entry.rho ** (4 / 7)) <= 6

    def test_amplitudes_start_at_one(self, plan):
        """log a of the first annulus is zero and the amplitudes decrease"""
        assert plan.entries[0].log_a == 0.0
        _, log_m = plan_log_modulus(plan)
        assert np.all(np.diff(log_m) < 0)

    def test_round_trip(self, plan):
        """Plans rebuild from their dictionaries"""
        assert type(plan).from_dict(plan.to_dict()).entries == plan.entries

    def test_invalid_radii(self):
        """rho1 below 200 or r_max not above rho1 is refused"""
        with pytest.raises(ConstructionError):
            plan_annuli(100.0, 1000.0)
        with pytest.raises(ConstructionError):
            plan_annuli(500.0, 400.0)


class TestPhase:
    def test_plateau_slope(self):
        """Phi' = -4k at plateau centres"""
        phase = build_phase(426, 169)
        centers = phase.plateau_centers()[:5]
        np.testing.assert_allclose(phase.derivative(centers, 1), -4 * 169)

    def test_periodic(self):
        """Phi repeats with period pi / (n + k)"""
        phase = build_phase(426, 169)
        phi = np.linspace(0.0, 0.1, 17)
        np.testing.assert_allclose(phase(phi + phase.period), phase(phi), atol=1e-9)

    def test_degrees_checked(self):
        """n must exceed k"""
        with pytest.raises(ConstructionError):
            build_phase(10, 20)


class TestSolution:
    def test_interfaces_continuous(self, solution):
        """log|u| matches across every interface"""
        assert all(jump <= 1e-12 for jump in interface_jumps(solution))

    def test_inner_mode(self, solution, plan):
        """At rho_j the solution is a r^-n e^{-in phi}"""
        phi = np.linspace(0.0, TWO_PI, 32, endpoint=False)
        for entry in plan.entries:
            log_u = solution.log_modulus(np.full(phi.shape, entry.rho), phi)
            np.testing.assert_allclose(log_u, entry.log_a - entry.n * np.log(entry.rho), rtol=1e-12)

    def test_winding(self, solution, plan):
        """Winding number -n on the inner circle"""
        entry = plan.entries[0]
        assert winding_number(solution, entry.rho, 8 * (entry.n + entry.k)) == -entry.n

    def test_range(self, solution):
        """Evaluation outside the chain raises"""
        with pytest.raises(RangeError):
            solution.log_modulus(np.array([100.0]), np.array([0.0]))

    def test_manifest_rebuild(self, solution):
        """The plan alone reproduces the field"""
        rebuilt = GlobalSolution.from_dict(solution.to_dict())
        r = np.array([210.0, 240.0, 280.0])
        phi = np.array([0.1, 2.0, 4.0])
        np.testing.assert_array_equal(rebuilt.log_modulus(r, phi), solution.log_modulus(r, phi))


class TestAudits:
    def test_first_annulus_audit(self, solution):
        """Positivity, single-valuedness, plateau harmonicity and ratio bounds"""
        audit = audit_segment(solution.segments[0], n_radial=20, n_angular=64)
        assert np.isfinite(audit['min_log_modulus'])
        assert audit['single_valuedness'] <= 1e-10
        assert audit['plateau_residual'] <= 1e-8
        assert audit['ratio_bounds']['holds']

    def test_zeros_confined_to_harmonic_zone(self, solution):
        """The blended pieces cancel only where both are harmonic"""
        segment = solution.segments[0]
        r = np.full(2, segment.rho + segment.h)
        phi = np.array([0.0, 0.5 * segment.phase.period])
        log_u = segment.log_modulus(r, phi)
        assert log_u[0] < log_u[1] - ZERO_DEPTH
        assert segment.harmonic_zone(r, phi)[0]
        np.testing.assert_array_equal(extract_potential(solution, r[:1], phi[:1]), 0.0)

    def test_audit_covers_step_edges(self, solution):
        """Step edges and matching radii are on the audit grid; their zeros are tolerated"""
        segment = solution.segments[0]
        s = (audit_radii(segment, 20) - segment.rho) / segment.h
        for edge in (1.0, 2.0, 3.0, 4.0, 5.5):
            assert np.min(np.abs(s - edge)) < 1e-9
        audit = audit_segment(segment, n_radial=20, n_angular=64)
        assert audit['harmonic_zeros'] >= 1

    def test_single_valuedness(self, solution):
        """u(r, 0) == u(r, 2 pi)"""
        assert single_valuedness_error(solution.segments[1], 16) <= 1e-10

    def test_ratio_bound_constant(self, solution):
        """An oversized constant fails the ratio check"""
        assert not check_ratio_bounds(solution.segments[0], constant=50.0)['holds']


class TestPotential:
    def test_zero_on_harmonic_zone(self, solution):
        """V = 0 where only harmonic pieces are active"""
        segment = solution.segments[0]
        r = np.full(8, segment.rho + 5.0 * segment.h)
        phi = np.linspace(0.0, 1.0, 8)
        np.testing.assert_array_equal(extract_potential(solution, r, phi), 0.0)

    def test_finite_in_rearrangement(self, solution):
        """V is finite inside the phase-freezing step"""
        segment = solution.segments[0]
        r = np.full(16, segment.rho + 2.5 * segment.h)
        phi = np.linspace(0.0, TWO_PI, 16, endpoint=False)
        assert np.all(np.isfinite(extract_potential(solution, r, phi)))

    def test_matches_direct_quotient(self, solution):
        """The logarithmic route agrees with -Pu/u on the scaled field"""
        segment = solution.segments[0]
        r = np.full(8, segment.rho + 2.5 * segment.h)
        phi = np.linspace(0.0, TWO_PI, 8, endpoint=False)
        u_scaled, _, _ = solution.field_jet(r, phi)
        direct = -compose_fourth_order(2.0).apply(u_scaled) / u_scaled.value
        np.testing.assert_allclose(extract_potential(solution, r, phi), direct, rtol=1e-8)
