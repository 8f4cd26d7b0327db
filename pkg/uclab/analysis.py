"""
Decay diagnostics on a constructed solution.

m(r) is the angular maximum of |u|; everything here works with log m(r),
since m itself underflows long before the chain ends.
"""

import logging

import numpy as np
from scipy.optimize import curve_fit, minimize_scalar

from uclab.errors import LabError, RangeError
from uclab.meshkov import DEGREE_EXPONENT, GlobalSolution, TWO_PI, plan_log_modulus
from uclab.models import DecayReport, Verdict
from uclab.utils.sampling import parallel_map, stream

logger = logging.getLogger(__name__)

ANGULAR_OVERSAMPLING = 8
MIN_DYNAMIC_RANGE = 4.0

DECAY_FLAGS = {
    'decay_fit': '-log m = c (r / r_lo)^s + d with a free offset d, not a log-log line',
    'envelope_constant': 'c_env is the largest C holding on every annulus, c_env_lower the smallest',
}


def angular_resolution(g: GlobalSolution, r: float) -> int:
    """Smallest admissible angular grid at radius r: 8 (n + k)."""
    segment = g.segment_at(r)
    return ANGULAR_OVERSAMPLING * (segment.n + segment.k)


def angular_max(g: GlobalSolution, r: float, n_angles: int = None, polish: bool = True) -> float:
    """log m(r), grid maximum refined by a bounded golden-section search."""
    required = angular_resolution(g, r)
    n_angles = n_angles or required
    if n_angles < required:
        raise LabError(f'{n_angles} angles under-resolve radius {r:g}; need at least {required}')

    phi = TWO_PI * np.arange(n_angles) / n_angles
    values = g.log_modulus(np.full(n_angles, float(r)), phi)
    best = int(np.argmax(values))
    peak = float(values[best])
    if not polish:
        return peak

    step = TWO_PI / n_angles
    result = minimize_scalar(
        lambda p: -float(g.log_modulus(np.array([float(r)]), np.array([p]))[0]),
        bounds=(phi[best] - step, phi[best] + step),
        method='bounded',
        options={'xatol': 1e-12},
    )
    return max(peak, -float(result.fun))


def log_m_profile(g: GlobalSolution, radii, n_angles: int = None, threads=None):
    radii = np.asarray(radii, dtype=float)
    values = parallel_map(lambda r: angular_max(g, r, n_angles), radii, threads)
    return np.array(values)


def envelope_integral(rho, r):
    """int_rho^r t^(1/7) dt."""
    return 7 / 8 * (np.asarray(r, dtype=float) ** DEGREE_EXPONENT - rho ** DEGREE_EXPONENT)


def envelope_bounds(rho: float, radii, log_m, log_m_rho: float):
    """
    Range [lower, upper] of C for which log m(r) - log m(rho) <= C (1 - J(r)) on the grid.

    J < 1 radii push C up, J > 1 radii cap it.
    """
    drop = np.asarray(log_m) - log_m_rho
    j = envelope_integral(rho, radii)
    near = j < 1
    far = j > 1
    lower = max(0.0, float(np.max(drop[near] / (1 - j[near])))) if near.any() else 0.0
    upper = float(np.min(-drop[far] / (j[far] - 1))) if far.any() else np.inf
    if np.any((j == 1) & (drop > 0)):
        upper = -np.inf
    return lower, upper


def envelope_check(g: GlobalSolution, rho: float, r_grid, n_angles: int = None):
    """
    Best envelope constant on r_grid: the largest C that still satisfies the inequality.

    Returns (C_env, lower) where lower is the smallest admissible C; the
    inequality holds with one constant iff lower <= C_env.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    log_m_rho = angular_max(g, rho, n_angles)
    log_m = log_m_profile(g, r_grid, n_angles)
    lower, upper = envelope_bounds(rho, r_grid, log_m, log_m_rho)
    logger.info(f'Envelope at rho={rho:g}: C in [{lower:.4g}, {upper:.4g}]')
    return upper, lower


def chain_envelope(g: GlobalSolution, radii_per_annulus: int = 16, n_angles: int = None):
    """Envelope bounds per annulus; a single constant exists iff max lower <= min upper."""
    rows = []
    for segment in g.segments:
        r = segment.r_in + (segment.r_out - segment.r_in) * np.arange(1, radii_per_annulus + 1) / radii_per_annulus
        upper, lower = envelope_check(g, segment.r_in, r, n_angles)
        rows.append({'index': segment.index, 'rho': segment.rho, 'lower': lower, 'upper': upper})
    return rows


def _stretched_exponential(x, c, s, d):
    return c * x ** s + d


def fit_decay_exponent(radii, log_m):
    """Fit -log m(r) = c (r / r_lo)^s + d; returns (s, c, residual)."""
    radii = np.asarray(radii, dtype=float)
    decay = -np.asarray(log_m, dtype=float)
    x = radii / radii[0]
    span = max(decay[-1] - decay[0], 1e-12)
    c0 = span / max(x[-1] ** DEGREE_EXPONENT - 1, 1e-12)
    p0 = (c0, DEGREE_EXPONENT, decay[0] - c0)
    (c, s, d), _ = curve_fit(
        _stretched_exponential, x, decay, p0=p0,
        bounds=([0.0, 0.0, -np.inf], [np.inf, 4.0, np.inf]),
        maxfev=20000,
    )
    residual = float(np.sqrt(np.mean((_stretched_exponential(x, c, s, d) - decay) ** 2)) / span)
    return float(s), float(c), residual


def decay_exponent_fit(g: GlobalSolution, r_lo: float, r_hi: float, n_radii: int = 64, n_angles: int = None):
    if r_lo < g.r_min or r_hi > g.r_max:
        raise RangeError(f'[{r_lo}, {r_hi}] not covered by [{g.r_min}, {g.r_max}]')
    if r_hi / r_lo < MIN_DYNAMIC_RANGE:
        raise RangeError(f'insufficient dynamic range r_hi/r_lo = {r_hi / r_lo:.3g} < {MIN_DYNAMIC_RANGE:g}')
    radii = np.geomspace(r_lo, r_hi, n_radii)
    log_m = log_m_profile(g, radii, n_angles)
    s, c, residual = fit_decay_exponent(radii, log_m)
    logger.info(f'Decay fit on [{r_lo:g}, {r_hi:g}]: s={s:.4f} (residual {residual:.2e})')
    return s, c, residual, radii, log_m


def plan_decay_fit(g: GlobalSolution):
    """Same fit on the plan's closed-form log m(rho_j)."""
    rho, log_m = plan_log_modulus(g.plan)
    return fit_decay_exponent(rho, log_m)


def unit_ball_offsets(n_samples: int, seed: int = 0):
    """Stratified points of the unit disk: equal-area rings times jittered angles."""
    rng = stream(seed, 11)
    n_rings = max(1, int(np.sqrt(n_samples)))
    per_ring = int(np.ceil(n_samples / n_rings))
    i = np.repeat(np.arange(n_rings), per_ring)[:n_samples]
    j = np.tile(np.arange(per_ring), n_rings)[:n_samples]
    radius = np.sqrt((i + rng.uniform(size=n_samples)) / n_rings)
    angle = TWO_PI * (j + rng.uniform(size=n_samples)) / per_ring
    return np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=-1)


def probe_M(g: GlobalSolution, R: float, n_centers: int = 64, n_ball_samples: int = 1024, seed: int = 0):
    """min over centres on |x0| = R of max over B(x0, 1) of log|u|."""
    if R - 1 < g.r_min or R + 1 > g.r_max:
        raise RangeError(f'[R-1, R+1] = [{R - 1}, {R + 1}] outside [{g.r_min}, {g.r_max}]')
    theta = TWO_PI * np.arange(n_centers) / n_centers
    centers = R * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    offsets = unit_ball_offsets(n_ball_samples, seed)
    points = centers[:, None, :] + offsets[None, :, :]
    r = np.linalg.norm(points, axis=-1)
    phi = np.mod(np.arctan2(points[..., 1], points[..., 0]), TWO_PI)
    sup = np.max(g.log_modulus(r, phi), axis=1)
    worst = int(np.argmin(sup))
    return {
        'R': float(R),
        'log_M': float(sup[worst]),
        'center': centers[worst].tolist(),
        'n_centers': n_centers,
        'n_ball_samples': n_ball_samples,
        'upper': float(angular_max(g, R - 1)),
    }


def decay_report(g: GlobalSolution, r_lo: float, r_hi: float, n_radii: int = 64, probe_radii=(),
                 n_centers: int = 64, n_ball_samples: int = 1024, band: float = 0.08, plan_tolerance: float = 0.02,
                 seed: int = 0, radii_per_annulus: int = 16) -> DecayReport:
    s, c, residual, radii, log_m = decay_exponent_fit(g, r_lo, r_hi, n_radii)
    plan_s, _, _ = plan_decay_fit(g)
    envelope = chain_envelope(g, radii_per_annulus)
    c_env = min(row['upper'] for row in envelope)
    c_lower = max(row['lower'] for row in envelope)
    probes = [probe_M(g, R, n_centers, n_ball_samples, seed) for R in probe_radii]
    ok = (abs(s - DEGREE_EXPONENT) <= band and abs(s - plan_s) <= plan_tolerance and c_lower <= c_env)
    return DecayReport(
        radii=radii.tolist(),
        log_m=log_m.tolist(),
        c_env=c_env,
        c_env_lower=c_lower,
        exponent=s,
        coefficient=c,
        residual=residual,
        plan_exponent=plan_s,
        probe_rows=probes,
        envelope=envelope,
        verdict=Verdict.PASS if ok else Verdict.FAIL,
    )
