"""
Strong pseudoconvexity verdicts.

Brackets {Re p_tau, Im p_tau} are sampled on the characteristic set of the
shifted symbol and normalized by (|xi| + tau |grad phi|)^(2d - 1), which makes
them scale-free in (xi, tau).
"""

import logging
from typing import Callable, Tuple

import numpy as np

from uclab.errors import SymbolError
from uclab.models import BracketReport, Verdict
from uclab.symbols import (
    PhasePoint,
    SymbolExpr,
    WeightFn,
    anisotropic_symbol,
    char_points_factor2,
    char_points_minus_laplacian,
    ellipticity_margin,
    laplacian_symbol,
    power_alpha,
    product_symbol,
    shift_symbol,
)
from uclab.utils.sampling import chunks, log_uniform, parallel_map, stream

logger = logging.getLogger(__name__)

BRACKET_TOLERANCE = 1e-9
VANISHING_TOLERANCE = 1e-10
TAU_RANGE = (0.1, 100.0)
CHUNK_SIZE = 2048

# stream ids
_CONDITION_STREAM = 31
_LEMMA_STREAM = 33


def sample_region(rng, region: Tuple[float, float], size: int):
    """Log-uniform radius, uniform angle."""
    r = log_uniform(rng, region[0], region[1], size)
    theta = rng.uniform(0.0, 2 * np.pi, size)
    return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)


def require_elliptic(p: SymbolExpr, region, seed: int = 0, n_points: int = 64):
    rng = stream(seed, 0)
    x = sample_region(rng, region, n_points)
    margin, xi = ellipticity_margin(p, x)
    worst = int(np.argmin(margin))
    if not margin[worst] > 1e-12:
        logger.error(f'{p.name} is not elliptic at x={x[worst]}')
        raise SymbolError(f'{p.name} vanishes on |xi| = 1', witness={'x': x[worst].tolist(), 'xi': xi[worst].tolist()})


def _normalizer(xi, tau, weight: WeightFn, x, degree: int):
    scale = np.linalg.norm(xi, axis=-1) + tau * weight.gradient_norm(x)
    return scale ** (2 * degree - 1)


def _degenerate(weight: WeightFn, x):
    g = weight.gradient_norm(x)
    return g <= 1e-12 * np.maximum(1.0, np.abs(weight.value(x)))


def _condition_cell(p, weight, region, seed, char_points, cell):
    index, count = cell
    rng = stream(seed, _CONDITION_STREAM, index)
    x = sample_region(rng, region, count)
    tau = log_uniform(rng, TAU_RANGE[0], TAU_RANGE[1], count)
    branch = rng.integers(0, 2, count)

    keep = ~_degenerate(weight, x)
    x, tau, branch = x[keep], tau[keep], branch[keep]
    if len(x) == 0:
        return None, count
    both = char_points(weight, x, tau)
    xi = np.where(branch[:, None] == 0, both[0], both[1])

    shifted = shift_symbol(p, weight, tau)
    raw = shifted.bracket(x, xi).real
    normalizer = _normalizer(xi, tau, weight, x, p.degree)
    residual = np.abs(shifted.evaluate(x, xi)) / (normalizer ** (p.degree / (2 * p.degree - 1)))
    return {'x': x, 'xi': xi, 'tau': tau, 'raw': raw, 'normalized': raw / normalizer,
            'residual': residual}, count - int(keep.sum())


def evaluate_characteristic_samples(p: SymbolExpr, weight: WeightFn, region, n_samples: int, seed: int,
                                    char_points: Callable = None):
    """Raw and normalized brackets at seeded characteristic samples, in sample order."""
    char_points = char_points or char_points_minus_laplacian
    results = parallel_map(
        lambda cell: _condition_cell(p, weight, region, seed, char_points, cell),
        list(chunks(n_samples, CHUNK_SIZE)),
    )
    skipped = sum(s for _, s in results)
    parts = [res for res, _ in results if res is not None]
    if not parts:
        raise SymbolError(f'every sample of {weight.weight_id} sits on a critical point of the weight')
    merged = {key: np.concatenate([part[key] for part in parts]) for key in parts[0]}
    return merged, skipped


def _classify(normalized, tolerance, vanishing_tolerance):
    if np.all(np.abs(normalized) <= vanishing_tolerance):
        return Verdict.VANISHING
    if np.min(normalized) > tolerance:
        return Verdict.POSITIVE
    return Verdict.VIOLATED


def _witness(samples, index):
    return PhasePoint(samples['x'][index], samples['xi'][index], samples['tau'][index]).to_dict()


def check_condition_31(p: SymbolExpr, weight: WeightFn, region=(0.1, 9.0), n_samples: int = 1000,
                       seed: int = 0, char_points: Callable = None, tolerance: float = BRACKET_TOLERANCE,
                       vanishing_tolerance: float = VANISHING_TOLERANCE) -> BracketReport:
    """
    Sample {Re p_tau, Im p_tau} on p_tau = 0 and classify the sign.

    char_points(weight, x, tau) parametrizes the characteristic set; the
    default suits every power of the Laplacian.
    """
    if region[0] <= 0:
        raise SymbolError('region must exclude the origin')
    require_elliptic(p, region, seed)
    samples, skipped = evaluate_characteristic_samples(p, weight, region, n_samples, seed, char_points)
    if skipped:
        logger.warning(f'Skipped {skipped} samples where grad {weight.weight_id} vanishes')

    off_set = float(np.max(samples['residual']))
    if off_set > 1e-10:
        raise SymbolError(f'characteristic sampler does not solve {p.name}_tau = 0 (residual {off_set:.3e})')

    normalized = samples['normalized']
    index = int(np.argmin(normalized))
    verdict = _classify(normalized, tolerance, vanishing_tolerance)
    report = BracketReport(
        operator_id=p.name,
        weight_id=weight.weight_id,
        sample_count=len(normalized),
        min_normalized_value=float(normalized[index]),
        witness=_witness(samples, index),
        verdict=verdict,
        max_abs_normalized=float(np.max(np.abs(normalized))),
        skipped=skipped,
        extras={'tolerance': tolerance, 'vanishing_tolerance': vanishing_tolerance,
                'max_characteristic_residual': off_set},
    )
    logger.info(f'Condition check {p.name} x {weight.weight_id}: {verdict.value} '
                f'(min {report.min_normalized_value:.3e} over {report.sample_count})')
    return report


def bk_closed_form_value(x, tau):
    r = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
    if np.any(r == 0):
        raise SymbolError('closed form is singular at the origin')
    return np.asarray(tau) ** 2 * np.exp(-3 * r) / r ** 3


def laplacian_bracket_scale(tau):
    """{Re p_tau, Im p_tau} for |xi|^2 equals this factor times the Hessian form."""
    return 4 * np.asarray(tau)


def hessian_quadratic_form(weight: WeightFn, x, xi, tau):
    oracle = weight.oracle(x)
    g, h = oracle.gradient, oracle.hessian
    xi = np.asarray(xi, dtype=float)
    xi_part = np.einsum('...j,...jk,...k->...', xi, h, xi)
    g_part = np.einsum('...j,...jk,...k->...', g, h, g)
    return xi_part + np.asarray(tau) ** 2 * g_part


def alpha_threshold(b: float) -> float:
    if not b > 0 or b == 1:
        raise SymbolError(f'threshold needs b > 0 and b != 1, got b={b}')
    return max(1 / b - 1, b - 1)


def factor2_bracket_factor(b, alpha, x):
    """(alpha + 2)((x1^2 + b x2^2)/|x|^2)^2 - b - (x1^2 + b^2 x2^2)/|x|^2."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x ** 2, axis=-1)
    quad_b = (x[..., 0] ** 2 + b * x[..., 1] ** 2) / r2
    quad_b2 = (x[..., 0] ** 2 + b ** 2 * x[..., 1] ** 2) / r2
    return (alpha + 2) * quad_b ** 2 - b - quad_b2


def factor2_bracket_closed_form(b, alpha, x):
    """2 alpha^3 |x|^(-3 alpha - 4) times the bracketed factor, at tau = 1."""
    r = np.linalg.norm(np.asarray(x, dtype=float), axis=-1)
    if np.any(r == 0):
        raise SymbolError('closed form is singular at the origin')
    return 2 * alpha ** 3 * r ** (-3 * alpha - 4) * factor2_bracket_factor(b, alpha, x)


def _lemma_cell(b, alpha, region, seed, cell):
    index, count = cell
    rng = stream(seed, _LEMMA_STREAM, index)
    x = sample_region(rng, region, count)
    factor = rng.integers(0, 2, count)
    branch = rng.integers(0, 2, count)
    weight = power_alpha(alpha)
    tau = np.ones(count)

    first = char_points_minus_laplacian(weight, x, tau)
    second = char_points_factor2(weight, b, x, tau)
    xi1 = np.where(branch[:, None] == 0, first[0], first[1])
    xi2 = np.where(branch[:, None] == 0, second[0], second[1])
    xi = np.where(factor[:, None] == 0, xi1, xi2)

    q1 = shift_symbol(laplacian_symbol(), weight, tau)
    q2 = shift_symbol(anisotropic_symbol(b), weight, tau)
    full = shift_symbol(product_symbol(b), weight, tau)
    bracket = full.bracket(x, xi).real
    split = np.where(
        factor == 0,
        q1.bracket(x, xi).real * np.abs(q2.evaluate(x, xi)) ** 2,
        q2.bracket(x, xi).real * np.abs(q1.evaluate(x, xi)) ** 2,
    )

    g = weight.gradient(x)
    scale = np.linalg.norm(xi, axis=-1) + np.linalg.norm(g, axis=-1)
    r = np.linalg.norm(x, axis=-1)
    on_first = factor == 0
    modulus = np.abs(q2.evaluate(x, xi)) ** 2
    bound = (b - 1) ** 2 * (xi[:, 1] ** 2 + g[:, 1] ** 2) ** 2
    return {
        'x': x, 'xi': xi, 'tau': tau, 'factor': factor,
        'bracket': bracket,
        'ratio': bracket * r / scale ** 7,
        'split_error': np.abs(bracket - split) / scale ** 7,
        'modulus_slack': np.where(on_first, modulus - bound * (1 - 1e-9), 0.0),
        'bracket_factor': factor2_bracket_factor(b, alpha, x),
    }


def check_lemma33_bound(b: float, alpha: float, region=(0.5, 1.0), n_samples: int = 10000, seed: int = 0,
                        tolerance: float = BRACKET_TOLERANCE):
    """
    Infimum of bracket * r / (|xi| + |grad phi|)^7 over both factors' characteristic sets.

    Returns (c_est, report); tau is normalized to 1 by homogeneity.
    """
    threshold = alpha_threshold(b)
    cells = parallel_map(lambda cell: _lemma_cell(b, alpha, region, seed, cell), list(chunks(n_samples, CHUNK_SIZE)))
    samples = {key: np.concatenate([cell[key] for cell in cells]) for key in cells[0]}

    ratio = samples['ratio']
    index = int(np.argmin(ratio))
    c_est = float(ratio[index])
    verdict = Verdict.POSITIVE if c_est > tolerance else Verdict.VIOLATED
    on_second = samples['factor'] == 1
    report = BracketReport(
        operator_id=f'product(b={b:g})',
        weight_id=power_alpha(alpha).weight_id,
        sample_count=len(ratio),
        min_normalized_value=c_est,
        witness=_witness(samples, index),
        verdict=verdict,
        max_abs_normalized=float(np.max(np.abs(ratio))),
        extras={
            'alpha_threshold': threshold,
            'above_threshold': alpha > threshold,
            'witness_factor': int(samples['factor'][index]) + 1,
            'max_split_error': float(np.max(samples['split_error'])),
            'modulus_bound_holds': bool(np.all(samples['modulus_slack'] >= 0)),
            'min_bracket_factor': float(np.min(samples['bracket_factor'][on_second]))
            if on_second.any() else None,
        },
    )
    if verdict is Verdict.VIOLATED:
        logger.warning(f'Fourth-order bracket bound fails for b={b}, alpha={alpha}: '
                       f'c_est={c_est:.3e} at {report.witness["x"]}')
    else:
        logger.info(f'Fourth-order bracket bound holds for b={b}, alpha={alpha}: c_est={c_est:.3e}')
    return c_est, report
