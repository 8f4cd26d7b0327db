import logging

from uclab.models import RunConfig, Verdict
from uclab.pseudoconvex import check_condition_31, check_lemma33_bound
from uclab.reports import write_csv, write_report
from uclab.symbols import laplacian_symbol, polyharmonic_symbol, weight_from_id

logger = logging.getLogger(__name__)

# verdicts measured for the catalogue; the concave log weight fails for -Delta
CONCAVE_WEIGHTS = ('log_lambda_phi3',)

FLAGS = {
    'bracket_scope': 'elliptic reduction only, bracket normalized by |xi + i tau grad phi|^(2 degree - 1)',
    'phi3_expected': 'log_lambda_phi3 with lambda > 1 is expected VIOLATED against -Delta',
    'factor2_bracket': 'sampled bracket is twice 2 alpha^3 (alpha + 1 - b) |x|^(-3 alpha - 4)',
    'c_est': 'empirical infimum over the samples',
}


def expected_verdict(m: int, weight) -> Verdict:
    if m > 1:
        return Verdict.VANISHING
    if weight.kind in CONCAVE_WEIGHTS:
        return Verdict.VIOLATED
    return Verdict.POSITIVE


def _condition_reports(config: RunConfig):
    section, tolerances = config.pseudoconvex, config.tolerances
    region = (section.region_lo, section.region_hi)
    orders = [int(m) for m in section.orders.split(',') if m.strip()]
    weights = [weight_from_id(w.strip()) for w in section.weights.split(',') if w.strip()]
    rows = []
    for m in orders:
        p = laplacian_symbol() if m == 1 else polyharmonic_symbol(m)
        for weight in weights:
            report = check_condition_31(p, weight, region, section.n_samples, config.run.seed,
                                        tolerance=tolerances.bracket, vanishing_tolerance=tolerances.vanishing)
            rows.append((m, report, expected_verdict(m, weight)))
    return rows


def _lemma_reports(config: RunConfig):
    section = config.pseudoconvex
    _, report = check_lemma33_bound(section.b, section.alpha, (section.region_lo, section.region_hi),
                                    section.n_samples, config.run.seed, tolerance=config.tolerances.bracket)
    return [(4, report, Verdict.POSITIVE)]


def cmd_pseudoconvex(config: RunConfig) -> int:
    """Bracket verdicts against the expected table; 0 iff every verdict matches."""
    if config.pseudoconvex.mode == 'lemma':
        rows = _lemma_reports(config)
    else:
        rows = _condition_reports(config)

    mismatches = []
    entries = []
    for m, report, expected in rows:
        entry = report.to_dict()
        entry.update({'order': m, 'expected': expected.value, 'matches': report.verdict is expected})
        entries.append(entry)
        if report.verdict is not expected:
            logger.warning(f'{report!r} expected {expected.value}; witness {report.witness}')
            mismatches.append(entry)

    verdict = Verdict.PASS if not mismatches else Verdict.FAIL
    output = config.run.output_dir
    write_report(output, 'pseudoconvex', config, verdict.value,
                 {'mode': config.pseudoconvex.mode, 'reports': entries, 'mismatches': len(mismatches)}, flags=FLAGS)
    write_csv(output, 'brackets.csv',
              ['operator_id', 'weight_id', 'sample_count', 'min_normalized_value', 'verdict', 'expected'],
              [(e['operator_id'], e['weight_id'], e['sample_count'], e['min_normalized_value'], e['verdict'],
                e['expected']) for e in entries])
    return 0 if verdict is Verdict.PASS else 1
