import logging

from uclab.analysis import DECAY_FLAGS, decay_report
from uclab.commands.build import build_solution
from uclab.meshkov import FLAGS
from uclab.models import RunConfig, Verdict
from uclab.reports import write_csv, write_report

logger = logging.getLogger(__name__)


def cmd_decay(config: RunConfig) -> int:
    """Fit the decay exponent, check the envelope and probe M(R)."""
    section, tolerances = config.decay, config.tolerances
    g = build_solution(config)
    probe_radii = [float(r) for r in section.probe_radii.split(',') if r.strip()]
    report = decay_report(
        g, section.r_lo, section.r_hi, section.n_radii,
        probe_radii=probe_radii,
        n_centers=section.n_centers,
        n_ball_samples=section.n_ball_samples,
        band=tolerances.decay_band,
        plan_tolerance=tolerances.plan_exponent,
        seed=config.run.seed,
        radii_per_annulus=section.radii_per_annulus,
    )
    output = config.run.output_dir
    write_report(output, 'decay', config, report.verdict.value, report.to_dict(), flags={**FLAGS, **DECAY_FLAGS})
    write_csv(output, 'decay.csv', ['r', 'log_m'], list(zip(report.radii, report.log_m)))
    write_csv(output, 'envelope.csv', ['index', 'rho', 'lower', 'upper'],
              [(row['index'], row['rho'], row['lower'], row['upper']) for row in report.envelope])
    if report.verdict is Verdict.FAIL:
        logger.warning(f'{report!r} outside the band around the plan exponent {report.plan_exponent:.4f}')
    return 0 if report.verdict is Verdict.PASS else 1
