import logging

import numpy as np

from uclab.meshkov import (
    FLAGS,
    TWO_PI,
    assemble_global,
    audit_segment,
    interface_jumps,
    measure_step_constants,
    plan_annuli,
)
from uclab.models import RunConfig, Verdict
from uclab.reports import write_csv, write_manifest, write_report
from uclab.utils.sampling import parallel_map

logger = logging.getLogger(__name__)


def build_solution(config: RunConfig):
    section = config.construction
    plan = plan_annuli(section.rho1, section.r_max)
    return assemble_global(plan, tolerance=config.tolerances.interface)


def _failures(audit, tolerances):
    failed = []
    if not audit['single_valuedness'] <= tolerances.single_valuedness:
        failed.append('single_valuedness')
    if not audit['plateau_residual'] <= tolerances.plateau:
        failed.append('plateau_residual')
    if not audit['ratio_bounds']['holds']:
        failed.append('ratio_bounds')
    return failed


def field_rows(g, n_radial: int, n_angular: int):
    """(annulus, r, phi, log|u|, arg u) on a coarse cell-centred grid per annulus."""
    rows = []
    phi = TWO_PI * np.arange(n_angular) / n_angular
    for segment in g.segments:
        r = segment.r_in + (segment.r_out - segment.r_in) * (np.arange(n_radial) + 0.5) / n_radial
        rr, pp = np.meshgrid(r, phi, indexing='ij')
        log_u = g.log_modulus(rr, pp)
        arg = g.argument(rr, pp)
        for i, j in np.ndindex(rr.shape):
            rows.append((segment.index, float(rr[i, j]), float(pp[i, j]), float(log_u[i, j]), float(arg[i, j])))
    return rows


def cmd_build(config: RunConfig) -> int:
    """Construct the chain, audit every annulus and write manifest, field CSV and report."""
    section, tolerances = config.construction, config.tolerances
    g = build_solution(config)
    audits = parallel_map(
        lambda segment: audit_segment(segment, section.n_radial, section.n_angular, section.ratio_constant),
        g.segments,
    )
    failures = {}
    for audit in audits:
        failed = _failures(audit, tolerances)
        if failed:
            failures[audit['index']] = failed
            logger.warning(f'Annulus {audit["index"]} fails {failed}')
        audit['step_constants'] = measure_step_constants(g.segments[audit['index']], seed=config.run.seed)

    verdict = Verdict.PASS if not failures else Verdict.FAIL
    output = config.run.output_dir
    write_manifest(output, g)
    write_csv(output, 'field.csv', ['annulus', 'r', 'phi', 'log_modulus', 'argument'],
              field_rows(g, section.field_radial, section.field_angular))
    write_csv(output, 'annuli.csv',
              ['index', 'rho', 'n', 'k', 'log_a', 'min_log_modulus', 'single_valuedness', 'plateau_residual'],
              [(e.index, e.rho, e.n, e.k, e.log_a, a['min_log_modulus'], a['single_valuedness'],
                a['plateau_residual']) for e, a in zip(g.plan.entries, audits)])
    write_report(output, 'build', config, verdict.value, {
        'annuli': len(g.segments),
        'r_min': g.r_min,
        'r_max': g.r_max,
        'interface_jumps': interface_jumps(g),
        'audits': audits,
        'failures': {str(k): v for k, v in failures.items()},
    }, flags=FLAGS)
    return 0 if verdict is Verdict.PASS else 1
