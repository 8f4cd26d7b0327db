"""
Polar tensor quadrature evaluated in log scale.

Radial integrals use Gauss-Legendre panels, angular integrals the periodic
trapezoid rule. Integrands are supplied as logarithms and reduced with
log-sum-exp, so weights like exp(2 tau phi) never leave log space.
"""

import logging

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import logsumexp

from uclab.errors import QuadratureError

logger = logging.getLogger(__name__)

GL_ORDER = 16


def gauss_legendre_panels(a: float, b: float, n_panels: int, order: int = GL_ORDER):
    """Nodes and weights, both shaped (n_panels, order)."""
    if not b > a:
        raise ValueError(f'empty interval [{a}, {b}]')
    x, w = leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    return mid[:, None] + half[:, None] * x, half[:, None] * w


def periodic_trapezoid(n: int):
    angles = 2 * np.pi * np.arange(n) / n
    return angles, np.full(n, 2 * np.pi / n)


def log_panel_sums(log_values, weights):
    """log of sum(weights * exp(log_values)) per panel; weights broadcast against log_values
    and the reduction runs over every axis but the first."""
    log_values = np.asarray(log_values, dtype=float)
    weights = np.broadcast_to(weights, log_values.shape)
    flat_values = log_values.reshape(log_values.shape[0], -1)
    flat_weights = weights.reshape(weights.shape[0], -1)
    with np.errstate(divide='ignore'):
        return logsumexp(flat_values, b=flat_weights, axis=1)


def log_total(panel_logs):
    with np.errstate(divide='ignore'):
        return float(logsumexp(panel_logs))


def _converged(coarse: float, fine: float, rtol: float) -> bool:
    if np.isneginf(coarse) or np.isneginf(fine):
        return bool(np.isneginf(coarse) and np.isneginf(fine))
    return abs(np.expm1(fine - coarse)) < rtol


def _checked(evaluate, n_panels: int):
    """Per-panel logs from evaluate; NaN or +inf stops the refinement at once."""
    panels = np.atleast_2d(evaluate(n_panels))
    bad = np.isnan(panels) | np.isposinf(panels)
    if bad.any():
        integral, cell = np.unravel_index(int(np.argmax(bad)), bad.shape)
        logger.error(f'Non-finite quadrature panel with {n_panels} panels (integral {integral}, cell {cell})')
        raise QuadratureError(
            'integrand is not finite',
            worst_cell={'integral': int(integral), 'panel': int(cell), 'n_panels': n_panels},
        )
    return panels


def refine_log_integrals(evaluate, n_panels: int, rtol: float = 1e-6, max_refinements: int = 6):
    """
    Double radial panels until every integral changes by less than rtol.

    evaluate(n_panels) returns per-panel log contributions shaped
    (n_integrals, n_panels). Returns (log totals, n_panels used).
    """
    coarse = _checked(evaluate, n_panels)
    fine = coarse
    for _ in range(max_refinements):
        coarse = fine
        n_panels *= 2
        fine = _checked(evaluate, n_panels)
        coarse_totals = [log_total(row) for row in coarse]
        fine_totals = [log_total(row) for row in fine]
        if all(_converged(c, f, rtol) for c, f in zip(coarse_totals, fine_totals)):
            return np.array(fine_totals), n_panels

    with np.errstate(divide='ignore', invalid='ignore'):
        paired = logsumexp(fine.reshape(fine.shape[0], -1, 2), axis=2)
        drift = np.abs(np.nan_to_num(paired - coarse))
    integral, cell = np.unravel_index(np.argmax(drift), drift.shape)
    logger.error(f'Quadrature did not converge with {n_panels} panels (integral {integral}, cell {cell})')
    raise QuadratureError(
        f'radial refinement cap reached at {n_panels} panels',
        worst_cell={'integral': int(integral), 'panel': int(cell), 'n_panels': n_panels // 2},
    )
