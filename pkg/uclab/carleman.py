"""
Numerical stress tests for weighted a priori inequalities.

Both sides of each inequality are integrals over an annulus. Test functions
are single angular modes g(r) e^{i l phi}, so radial work happens on
RadialSeries and only the anisotropic operator needs an angular grid.
Integrands are assembled as logarithms; exp(2 tau phi) is never formed.
"""

import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from uclab.errors import LabError, RangeError
from uclab.models import CarlemanReport, CarlemanRow, Verdict
from uclab.operators import compose_fourth_order
from uclab.pseudoconvex import alpha_threshold
from uclab.symbols import PHI1_R_MAX, phi1_integral, power_alpha
from uclab.utils.jets import RadialSeries, jet_variable
from uclab.utils.profiles import Bump
from uclab.utils.quadrature import gauss_legendre_panels, log_panel_sums, periodic_trapezoid, refine_log_integrals
from uclab.utils.sampling import chunks, parallel_map, stream

logger = logging.getLogger(__name__)

LOG_TWO_PI = float(np.log(2 * np.pi))
RADIAL_PANELS = 16
ANGLES = 16
PANEL_CHUNK = 64
QUADRATURE_RTOL = 1e-6
SLOPE_TOLERANCE = 0.3
TAU_GRID = (5.0, 200.0, 20)

# reading of the mixed-order norm: both terms squared
NORM_READING = 'both_squared'

FLAGS = {
    'norm_reading': NORM_READING,
    'fourth_derivative_norm': '||d^4 v|| evaluated as ||Delta^2 v||, equal for compactly supported v',
    'c2': 'configuration parameter, tau must exceed it',
}

_TEST_FUNCTION_STREAM = 41


# ---------------------------------------------------------------------------
# weight


def bk_log_omega(r):
    """log omega(r) = log r + int_0^r (e^-t - 1)/t dt, i.e. -phi1(r)."""
    r = np.asarray(r, dtype=float)
    if np.any((r <= 0) | (r >= PHI1_R_MAX)):
        raise RangeError(f'omega is defined on (0, {PHI1_R_MAX:g})')
    return np.log(r) + phi1_integral(r)


def bk_omega(r):
    return np.exp(bk_log_omega(r))


@dataclass(frozen=True)
class CarlemanWeight:
    """omega = exp(-phi1) on (0, r_max)."""

    r_max: float = PHI1_R_MAX

    def log(self, r):
        return bk_log_omega(r)

    def __call__(self, r):
        return bk_omega(r)

    def grid(self, n_points: int):
        return np.linspace(0, self.r_max, n_points + 2)[1:-1]

    def is_increasing(self, n_points: int = 10_000) -> bool:
        return bool(np.all(np.diff(self.log(self.grid(n_points))) > 0))

    def ratio_constant(self, n_points: int = 10_000, r_max: float = None) -> float:
        """Smallest C1 with 1/C1 <= omega(r)/r <= C1 on the grid."""
        r = self.grid(n_points)
        if r_max is not None:
            r = r[r <= r_max]
        log_ratio = self.log(r) - np.log(r)
        return float(np.exp(np.max(np.abs(log_ratio))))


# ---------------------------------------------------------------------------
# test functions


@dataclass(frozen=True)
class TestFunction:
    """f(r, phi) = psi(scale r) q(scale r) e^{i ell phi}, psi a bump on the base support."""

    __test__ = False

    f_id: str
    base_support: Tuple[float, float]
    ell: int = 0
    poly: Tuple[complex, ...] = (1.0,)
    order: int = 4
    scale: float = 1.0
    bump: Bump = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        r0, r1 = self.base_support
        if not 0 < r0 < r1:
            raise LabError(f'test function support must satisfy 0 < r0 < r1, got {self.base_support}')
        object.__setattr__(self, 'bump', Bump(r0, r1))

    @property
    def support(self):
        r0, r1 = self.base_support
        return r0 / self.scale, r1 / self.scale

    def series(self, r, order: int = None) -> RadialSeries:
        """Radial profile expanded at r, derivatives taken in r itself."""
        order = self.order if order is None else order
        r = np.asarray(r, dtype=float)
        t = r * self.scale
        r0, r1 = self.base_support
        profile = self.bump.series(t, order) * RadialSeries.polynomial(
            self.poly, t, order, center=0.5 * (r0 + r1), scale=0.5 * (r1 - r0))
        powers = self.scale ** np.arange(order + 1)
        coeffs = profile.coeffs * powers.reshape((-1,) + (1,) * r.ndim)
        return RadialSeries(coeffs, r, order)

    def radial(self, r):
        return self.series(r, 0).value

    def __call__(self, r, phi):
        return self.radial(r) * np.exp(1j * self.ell * np.asarray(phi, dtype=float))

    def laplacian_power(self, r, m: int):
        """Radial part of Delta^m f at r."""
        s = self.series(r, 2 * m)
        for _ in range(m):
            s = s.laplacian_mode(self.ell)
        return s.value

    def jet(self, base, order: int = 4):
        """Jet4 of f at polar base points."""
        r, phi = base
        radial = self.series(r, order).lift(base, 'r', order)
        return radial * (jet_variable('phi', base, order) * (1j * self.ell)).exp()

    def rescaled(self, lam: float) -> 'TestFunction':
        """x -> f(lam x); the support shrinks by 1/lam."""
        return TestFunction(f'{self.f_id}@{lam:g}', self.base_support, self.ell, self.poly,
                            self.order, self.scale * lam)

    def to_dict(self):
        return {
            'f_id': self.f_id,
            'support': list(self.support),
            'ell': self.ell,
            'poly': [[complex(c).real, complex(c).imag] for c in self.poly],
            'scale': self.scale,
        }


def gen_test_function(seed: int, m_or_P, support=(1.0, 2.0), ell: int = 0, poly_degree: int = 2,
                      index: int = 0) -> TestFunction:
    """
    Seeded test function for the m-th power of the Laplacian (m int) or the
    fourth-order operator (m_or_P == 'P').

    poly_degree 0 gives q = 1.
    """
    r0, r1 = support
    if not 0 < r0 < r1 < PHI1_R_MAX:
        raise LabError(f'support must lie in (0, {PHI1_R_MAX:g}), got {support}')
    order = 4 if m_or_P == 'P' else 2 * int(m_or_P)
    if poly_degree == 0:
        poly = (1.0,)
    else:
        rng = stream(seed, _TEST_FUNCTION_STREAM, index)
        poly = tuple(rng.normal(size=poly_degree + 1) + 1j * rng.normal(size=poly_degree + 1))
    return TestFunction(f'f{seed}.{index}', (float(r0), float(r1)), int(ell), poly, order)


# ---------------------------------------------------------------------------
# quadrature helpers


def _log_abs_sq(values):
    with np.errstate(divide='ignore'):
        return 2 * np.log(np.abs(values))


def _radial_integrals(support, integrands, n_panels: int, rtol: float):
    """log int_support exp(L_i(r)) dr for every log-integrand L_i returned by integrands(r)."""
    a, b = support

    def evaluate(n):
        nodes, weights = gauss_legendre_panels(a, b, n)
        return np.stack([log_panel_sums(row, weights) for row in integrands(nodes)])

    totals, used = refine_log_integrals(evaluate, n_panels, rtol)
    logger.debug(f'Radial quadrature on [{a:g}, {b:g}] converged with {used} panels')
    return totals


def _polar_integral(support, integrand, n_panels: int, rtol: float, n_angles: int = ANGLES):
    """log int int exp(L(r, phi)) r dr dphi with the angle on the periodic trapezoid rule."""
    a, b = support
    angles, angle_weights = periodic_trapezoid(n_angles)

    def evaluate(n):
        nodes, weights = gauss_legendre_panels(a, b, n)
        out = np.empty(n)
        for index, count in chunks(n, PANEL_CHUNK):
            rows = slice(index * PANEL_CHUNK, index * PANEL_CHUNK + count)
            r = nodes[rows][..., None]
            logs = integrand(r, angles[None, None, :]) + np.log(r)
            out[rows] = log_panel_sums(logs, weights[rows][..., None] * angle_weights)
        return out[None, :]

    totals, used = refine_log_integrals(evaluate, n_panels, rtol)
    logger.debug(f'Polar quadrature on [{a:g}, {b:g}] x {n_angles} angles converged with {used} panels')
    return float(totals[0])


def _check_tau(tau, c2):
    if not tau > c2:
        raise LabError(f'tau={tau} must exceed C2={c2}')


# ---------------------------------------------------------------------------
# polyharmonic inequality


def _omega_integrals(f: TestFunction, powers, n_panels: int, rtol: float):
    """log int omega^e |Delta^j f|^2 dx for every (j, e) in powers."""

    def integrands(r):
        log_omega = bk_log_omega(r)
        rows = []
        for j, exponent in powers:
            values = f.laplacian_power(r, j) if j else f.radial(r)
            rows.append(exponent * log_omega + _log_abs_sq(values) + np.log(r))
        return rows

    return _radial_integrals(f.support, integrands, n_panels, rtol) + LOG_TWO_PI


def test_inequality_21(f: TestFunction, m: int, tau: float, c2: float = 0.0, n_panels: int = RADIAL_PANELS,
                       rtol: float = QUADRATURE_RTOL):
    """
    (log LHS, log RHS) of
    tau^{3m} int omega^{-1-2tau} |f|^2 <= C int omega^{3m-1-2tau} |Delta^m f|^2.
    """
    if m not in (1, 2, 3):
        raise LabError(f'm must be 1, 2 or 3, got {m}')
    _check_tau(tau, c2)
    lhs, rhs = _omega_integrals(f, [(0, -1 - 2 * tau), (m, 3 * m - 1 - 2 * tau)], n_panels, rtol)
    return 3 * m * float(np.log(tau)) + float(lhs), float(rhs)


test_inequality_21.__test__ = False


def chain_inequality_21(f: TestFunction, m: int, tau: float, n_panels: int = RADIAL_PANELS,
                        rtol: float = QUADRATURE_RTOL):
    """
    Chain m first-order inequalities with tau_j = tau - 3j/2 and compare with
    the direct m-th order test.

    The chain telescopes to the direct ratio up to the bookkeeping gap
    3m log tau - sum 3 log tau_j, so the discrepancy measures quadrature error.
    """
    taus = [tau - 1.5 * j for j in range(m)]
    if taus[-1] <= 0:
        raise LabError(f'tau={tau} too small to chain {m} steps')
    links = []
    for j, tau_j in enumerate(taus):
        lhs, rhs = _omega_integrals(f, [(j, -1 - 2 * tau_j), (j + 1, 2 - 2 * tau_j)], n_panels, rtol)
        links.append({'j': j, 'tau': tau_j, 'log_lhs': 3 * float(np.log(tau_j)) + float(lhs),
                      'log_rhs': float(rhs)})
    chained = sum(link['log_lhs'] - link['log_rhs'] for link in links)
    gap = 3 * m * float(np.log(tau)) - 3 * float(np.sum(np.log(taus)))
    lhs, rhs = test_inequality_21(f, m, tau, n_panels=n_panels, rtol=rtol)
    direct = lhs - rhs
    return {
        'links': links,
        'direct_log_ratio': direct,
        'chained_log_ratio': chained,
        'tau_product_gap': gap,
        'discrepancy': direct - (chained + gap),
    }


# ---------------------------------------------------------------------------
# fourth-order anisotropic inequality


def _check_alpha(b, alpha):
    threshold = alpha_threshold(b)
    if not alpha > threshold:
        raise LabError(f'alpha={alpha} must exceed the threshold {threshold:g} for b={b:g}')


def _pu_integral(u: TestFunction, b: float, alpha: float, tau: float, n_panels: int, rtol: float,
                 n_angles: int):
    """log int e^{2 tau phi} |P u|^2 dx."""
    op = compose_fourth_order(b)
    weight = power_alpha(alpha)

    def integrand(r, phi):
        pu = op.apply(u.jet((r, phi)))
        return 2 * tau * weight.radial_series(r, 0).value.real + _log_abs_sq(pu)

    return _polar_integral(u.support, integrand, n_panels, rtol, n_angles)


def test_inequality_33(u: TestFunction, b: float, alpha: float, tau: float, n_panels: int = RADIAL_PANELS,
                       rtol: float = QUADRATURE_RTOL, n_angles: int = ANGLES):
    """
    (log LHS, log RHS) of
    tau^-1 ||v||_{4,tau}^2 <= C ||e^{tau phi} P u||^2, v = (r |grad phi|)^-1/2 e^{tau phi} u,
    with ||v||_{4,tau}^2 = ||d^4 v||^2 + || |tau grad phi|^4 v ||^2 and phi = r^-alpha.

    ||d^4 v||^2 is evaluated as ||Delta^2 v||^2, equal for compactly supported v.
    """
    _check_alpha(b, alpha)
    weight = power_alpha(alpha)

    def integrands(r):
        phi = weight.radial_series(r, 5)
        slope = -phi.derivative()
        prefactor = (RadialSeries.variable(r, 4) * slope) ** -0.5
        # e^{tau (phi - phi(r))}: value 1, derivatives polynomial in tau
        shift = (tau * (phi - phi.value)).exp()
        w = prefactor * shift * u.series(r, 4)
        fourth = w.laplacian_mode(u.ell).laplacian_mode(u.ell).value
        base = 2 * tau * phi.value.real + np.log(r)
        return [
            base + _log_abs_sq(fourth),
            base + 8 * np.log(tau * slope.value.real) + _log_abs_sq(prefactor.value * u.radial(r)),
        ]

    derivative_term, weight_term = _radial_integrals(u.support, integrands, n_panels, rtol)
    lhs = -float(np.log(tau)) + LOG_TWO_PI + float(np.logaddexp(derivative_term, weight_term))
    rhs = _pu_integral(u, b, alpha, tau, n_panels, rtol, n_angles)
    return lhs, rhs


test_inequality_33.__test__ = False


def test_inequality_weighted(u: TestFunction, b: float, alpha: float, tau: float, n_panels: int = RADIAL_PANELS,
                             rtol: float = QUADRATURE_RTOL, n_angles: int = ANGLES):
    """
    (log LHS, log RHS) of the integrated form
    tau^7 int |grad phi|^7 |x|^-1 e^{2 tau phi} |u|^2 <= C int e^{2 tau phi} |P u|^2.
    """
    _check_alpha(b, alpha)
    weight = power_alpha(alpha)

    def integrands(r):
        phi = weight.radial_series(r, 1)
        gradient = np.abs(phi.derivative_value(1).real)
        # |x|^-1 cancels the polar Jacobian
        return [2 * tau * phi.value.real + 7 * np.log(gradient) + _log_abs_sq(u.radial(r))]

    (lhs,) = _radial_integrals(u.support, integrands, n_panels, rtol)
    rhs = _pu_integral(u, b, alpha, tau, n_panels, rtol, n_angles)
    return 7 * float(np.log(tau)) + LOG_TWO_PI + float(lhs), rhs


test_inequality_weighted.__test__ = False


def scaling_audit_33(u: TestFunction, b: float, alpha: float, tau: float, lam: float, **kwargs):
    """
    Compare u(lam x) at tau against u at tau lam^alpha.

    For phi = r^-alpha both sides pick up exactly lam^6, so the log ratios agree
    and each side drifts by 6 log lam.
    """
    scaled = u.rescaled(lam)
    equivalent_tau = tau * lam ** alpha
    lhs_scaled, rhs_scaled = test_inequality_33(scaled, b, alpha, tau, **kwargs)
    lhs, rhs = test_inequality_33(u, b, alpha, equivalent_tau, **kwargs)
    return {
        'lam': lam,
        'tau': tau,
        'equivalent_tau': equivalent_tau,
        'lhs_drift': lhs_scaled - lhs,
        'rhs_drift': rhs_scaled - rhs,
        'predicted_drift': 6 * float(np.log(lam)),
        'log_ratio_scaled': lhs_scaled - rhs_scaled,
        'log_ratio': lhs - rhs,
    }


# name -> (tester, exponent p of the tau^p factor on the left)
TESTS = {
    'inequality_21': (test_inequality_21, lambda params: 3 * params['m']),
    'inequality_33': (test_inequality_33, lambda params: -1),
    'weighted_33': (test_inequality_weighted, lambda params: 7),
}


# ---------------------------------------------------------------------------
# sweeps


def tau_grid(lo: float = TAU_GRID[0], hi: float = TAU_GRID[1], n: int = TAU_GRID[2]):
    return np.geomspace(lo, hi, n)


def fit_slope(taus, values) -> float:
    """Least-squares slope of values against log tau; nan for a single point."""
    taus = np.asarray(taus, dtype=float)
    if len(taus) < 2:
        return float('nan')
    return float(np.polyfit(np.log(taus), np.asarray(values, dtype=float), 1)[0])


def tau_sweep(test: str, f: TestFunction, taus, threads=None, slope_tolerance: float = SLOPE_TOLERANCE,
              log_constant_cap: float = np.inf, **params) -> CarlemanReport:
    """
    Run one inequality over a tau grid.

    The slope is fitted to log(RHS / LHS-without-tau-factor); with the tau
    factor tau^p on the left, one constant covers the grid when the slope is
    at least p. The empirical constant is the largest LHS/RHS seen.
    """
    if test not in TESTS:
        raise LabError(f"Unknown inequality '{test}'")
    fn, tau_exponent = TESTS[test]
    taus = [float(t) for t in np.atleast_1d(taus)]
    if not taus:
        raise LabError('tau grid is empty')
    exponent = tau_exponent(params)
    sides = parallel_map(lambda t: fn(f, tau=t, **params), taus, threads)

    rows = [
        CarlemanRow(f_id=f.f_id, tau=t, log_lhs=lhs, log_rhs=rhs, log_tau_factor=exponent * float(np.log(t)))
        for t, (lhs, rhs) in zip(taus, sides)
    ]
    slope = fit_slope(taus, [row.log_rhs - (row.log_lhs - row.log_tau_factor) for row in rows])
    ratios = np.array([row.log_ratio for row in rows])
    log_constant = float(np.max(ratios))

    ok = bool(np.all(np.isfinite(ratios))) and log_constant <= log_constant_cap
    if np.isfinite(slope):
        ok = ok and slope >= exponent - slope_tolerance
    report = CarlemanReport(
        test=test,
        parameters={'f': f.to_dict(), 'norm_reading': NORM_READING, **params},
        rows=rows,
        slope=slope,
        log_constant=log_constant,
        verdict=Verdict.PASS if ok else Verdict.FAIL,
        expected_slope=float(exponent),
    )
    if report.verdict is Verdict.FAIL:
        logger.warning(f'{test} fails for {f.f_id}: slope {slope:.3f} (need {exponent - slope_tolerance:.3f}), '
                       f'log C = {log_constant:.3f}')
    else:
        logger.info(f'{test} holds for {f.f_id}: slope {slope:.3f}, log C = {log_constant:.3f}')
    return report
