import logging

from uclab.carleman import FLAGS, chain_inequality_21, gen_test_function, tau_grid, tau_sweep
from uclab.models import RunConfig, Verdict
from uclab.reports import write_csv, write_report

logger = logging.getLogger(__name__)


def sweep_parameters(config: RunConfig):
    section = config.carleman
    params = {'rtol': config.tolerances.quadrature_rtol}
    if section.test == 'inequality_21':
        params.update({'m': section.m, 'c2': section.c2})
    else:
        params.update({'b': section.b, 'alpha': section.alpha})
    return params


def seeded_functions(config: RunConfig):
    section = config.carleman
    kind = section.m if section.test == 'inequality_21' else 'P'
    return [
        gen_test_function(config.run.seed, kind, (section.support_lo, section.support_hi),
                          ell=j % (section.max_ell + 1), poly_degree=section.poly_degree, index=j)
        for j in range(section.n_functions)
    ]


def cmd_carleman(config: RunConfig) -> int:
    """One tau sweep per seeded test function; 0 iff every sweep passes."""
    section = config.carleman
    taus = tau_grid(section.tau_lo, section.tau_hi, section.n_tau)
    params = sweep_parameters(config)
    functions = seeded_functions(config)
    reports = [tau_sweep(section.test, f, taus, slope_tolerance=config.tolerances.slope, **params)
               for f in functions]

    payload = {'sweeps': [report.to_dict() for report in reports]}
    if section.test == 'inequality_21' and section.m > 1:
        tau = float(taus[-1])
        payload['chain'] = chain_inequality_21(functions[0], section.m, tau, rtol=config.tolerances.quadrature_rtol)

    failed = [report.parameters['f']['f_id'] for report in reports if report.verdict is Verdict.FAIL]
    verdict = Verdict.PASS if not failed else Verdict.FAIL
    payload['failed'] = failed
    output = config.run.output_dir
    write_report(output, 'carleman', config, verdict.value, payload, flags=FLAGS)
    write_csv(output, 'carleman.csv', ['f_id', 'tau', 'log_lhs', 'log_rhs', 'log_tau_factor'],
              [(row.f_id, row.tau, row.log_lhs, row.log_rhs, row.log_tau_factor)
               for report in reports for row in report.rows])
    if failed:
        logger.warning(f'Carleman sweeps fail for {failed}')
    return 0 if verdict is Verdict.PASS else 1
