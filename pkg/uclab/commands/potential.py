import logging

import numpy as np

from uclab.commands.build import build_solution
from uclab.meshkov import FLAGS, TWO_PI
from uclab.models import PotentialReport, RunConfig, Verdict
from uclab.operators import extract_potential
from uclab.reports import write_csv, write_report
from uclab.utils.sampling import parallel_map

logger = logging.getLogger(__name__)

# radii compared for uniformity of sup|V|
CROSS_SCALE_RADII = (200.0, 1000.0)


def potential_row(g, segment, n_radial: int, n_angular: int, b: float):
    s = (np.arange(n_radial) + 0.5) / n_radial
    r = segment.r_in + (segment.r_out - segment.r_in) * s
    phi = TWO_PI * np.arange(n_angular) / n_angular
    rr, pp = np.meshgrid(r, phi, indexing='ij')
    v = np.abs(extract_potential(g, rr, pp, b))
    worst = np.unravel_index(int(np.nanargmax(v)), v.shape) if np.isfinite(v).any() else (0, 0)
    return {
        'index': segment.index,
        'rho': segment.rho,
        'sup_abs_v': float(np.max(v)),
        'witness': {'r': float(rr[worst]), 'phi': float(pp[worst])},
        'finite': bool(np.all(np.isfinite(v))),
    }


def cross_scale_ratio(rows):
    """sup|V| ratio between the annuli nearest the two comparison radii, if both are covered."""
    rho = np.array([row['rho'] for row in rows])
    lo, hi = CROSS_SCALE_RADII
    if len(rows) < 2 or rho.max() < hi:
        return None
    a = rows[int(np.argmin(np.abs(rho - lo)))]['sup_abs_v']
    c = rows[int(np.argmin(np.abs(rho - hi)))]['sup_abs_v']
    return float(max(a, c) / min(a, c)) if min(a, c) > 0 else None


def cmd_potential(config: RunConfig) -> int:
    """sup|V| per annulus on a probe grid; 0 iff V is finite everywhere."""
    section = config.construction
    g = build_solution(config)
    rows = parallel_map(
        lambda segment: potential_row(g, segment, section.potential_radial, section.potential_angular,
                                      section.potential_b),
        g.segments,
    )
    finite = all(row['finite'] for row in rows)
    report = PotentialReport(
        b=section.potential_b,
        rows=rows,
        sup_abs_v=float(max(row['sup_abs_v'] for row in rows)),
        verdict=Verdict.PASS if finite else Verdict.FAIL,
    )
    if not finite:
        bad = [row['index'] for row in rows if not row['finite']]
        logger.warning(f'V is not finite on annuli {bad}')

    output = config.run.output_dir
    payload = report.to_dict()
    payload['cross_scale_ratio'] = cross_scale_ratio(rows)
    write_report(output, 'potential', config, report.verdict.value, payload, flags=FLAGS)
    write_csv(output, 'potential.csv', ['index', 'rho', 'sup_abs_v'],
              [(row['index'], row['rho'], row['sup_abs_v']) for row in rows])
    return 0 if report.verdict is Verdict.PASS else 1
