import configparser
import csv
import json

import pytest
from click.testing import CliRunner

from uclab import __version__
from uclab.cli import EXIT_CONFIG, cli, error_payload
from uclab.errors import ConstructionError, QuadratureError


@pytest.fixture
def runner():
    """Click test runner"""
    return CliRunner()


@pytest.fixture
def invoke(runner, output_dir):
    """Run the CLI in the testing environment, writing into output_dir"""
    def _invoke(*args):
        return runner.invoke(cli, ['--env', 'testing', '--output-dir', str(output_dir), *args])
    return _invoke


def read_json(path):
    with open(path, encoding='utf-8') as handle:
        return json.load(handle)


def read_rows(path):
    with open(path, newline='', encoding='utf-8') as handle:
        return list(csv.reader(handle))


class TestPseudoconvex:
    def test_example_preset_passes(self, invoke, output_dir):
        """The catalogue verdicts match their expected table"""
        result = invoke('--preset', 'example-3.2', 'pseudoconvex')
        assert result.exit_code == 0, result.output
        report = read_json(output_dir / 'report.json')
        assert report['verdict'] == 'pass'
        assert report['command'] == 'pseudoconvex'
        assert report['config']['run']['preset'] == 'example-3.2'
        assert report['flags']['phi3_expected'].startswith('log_lambda_phi3')
        assert (output_dir / 'brackets.csv').exists()

    def test_reports_are_byte_identical(self, invoke, output_dir):
        """Same configuration, same bytes"""
        invoke('--preset', 'example-3.2', 'pseudoconvex')
        first = (output_dir / 'report.json').read_bytes()
        invoke('--preset', 'example-3.2', 'pseudoconvex')
        assert (output_dir / 'report.json').read_bytes() == first


class TestConfigErrors:
    def test_r_max_below_rho1(self, invoke):
        """Invalid construction radii exit with 2"""
        result = invoke('--set', 'construction.r_max=150', 'build')
        assert result.exit_code == EXIT_CONFIG

    def test_malformed_override(self, invoke):
        """Overrides need section.key=value"""
        assert invoke('--set', 'bogus', 'pseudoconvex').exit_code == EXIT_CONFIG

    def test_empty_tau_grid(self, invoke, output_dir):
        """n_tau = 0 is a configuration error and writes no report"""
        result = invoke('--set', 'carleman.n_tau=0', 'carleman')
        assert result.exit_code == EXIT_CONFIG
        assert not (output_dir / 'report.json').exists()

    def test_missing_config_file(self, invoke, tmp_path):
        """Unreadable INI files exit with 2"""
        assert invoke('--config', str(tmp_path / 'missing.ini'), 'build').exit_code == EXIT_CONFIG


class TestConstruction:
    def test_build_outputs(self, invoke, output_dir):
        """build writes the manifest, the field table and one row per annulus"""
        result = invoke('build')
        assert result.exit_code in (0, 1), result.output
        assert (output_dir / 'manifest.json').exists()
        assert (output_dir / 'field.csv').exists()
        report = read_json(output_dir / 'report.json')
        annuli = read_rows(output_dir / 'annuli.csv')
        assert annuli[0][:4] == ['index', 'rho', 'n', 'k']
        assert len(annuli) == report['payload']['annuli'] + 1
        assert 'flags' in report

    def test_potential(self, invoke, output_dir):
        """V stays finite on every annulus"""
        result = invoke('potential')
        assert result.exit_code == 0, result.output
        report = read_json(output_dir / 'report.json')
        assert report['verdict'] == 'pass'
        assert len(report['payload']['rows']) >= 1
        assert 'zero_set' in report['flags']

    def test_decay_writes_report(self, invoke, output_dir):
        """The decay run always leaves a report"""
        result = invoke('decay')
        assert result.exit_code in (0, 1), result.output
        report = read_json(output_dir / 'report.json')
        assert report['verdict'] in ('pass', 'fail')
        assert report['flags']['decay_fit'].startswith('-log m = c (r / r_lo)^s + d')
        assert 'degree_rule' in report['flags']
        assert (output_dir / 'decay.csv').exists()

    def test_decay_out_of_range(self, invoke, output_dir):
        """Fit radii beyond the chain fail with a witness report"""
        result = invoke('--set', 'decay.r_hi=5000', 'decay')
        assert result.exit_code == 1
        report = read_json(output_dir / 'report.json')
        assert report['verdict'] == 'fail'
        assert report['payload']['type'] == 'RangeError'


class TestCarleman:
    def test_sweeps(self, invoke, output_dir):
        """One sweep per seeded function and one CSV row per tau"""
        result = invoke('carleman')
        assert result.exit_code in (0, 1), result.output
        report = read_json(output_dir / 'report.json')
        assert len(report['payload']['sweeps']) == 2
        assert report['flags']['norm_reading'] == 'both_squared'
        rows = read_rows(output_dir / 'carleman.csv')
        assert rows[0] == ['f_id', 'tau', 'log_lhs', 'log_rhs', 'log_tau_factor']
        assert len(rows) == 2 * 4 + 1


class TestMisc:
    def test_write_config(self, runner, tmp_path):
        """The effective configuration round-trips through INI"""
        path = tmp_path / 'run.ini'
        result = runner.invoke(cli, ['--env', 'testing', '--preset', 'lemma-3.3', 'write-config', str(path)])
        assert result.exit_code == 0, result.output
        parser = configparser.ConfigParser(interpolation=None)
        parser.read(path, encoding='utf-8')
        assert parser['carleman']['test'] == 'inequality_33'
        assert parser['construction']['r_max'] == '900.0'

    def test_version(self, runner):
        """--version prints the package version"""
        result = runner.invoke(cli, ['--version'])
        assert result.exit_code == 0
        assert __version__ in result.output

    def test_help_lists_keys(self, runner):
        """The help epilogue documents the configuration keys"""
        result = runner.invoke(cli, ['--help'])
        assert '[carleman]' in result.output

    def test_error_payloads(self):
        """Failures carry their witness data"""
        payload = error_payload(ConstructionError('phase not monotone', annulus=3, witness={'phi': 0.5}))
        assert payload == {'error': 'phase not monotone', 'annulus': 3, 'witness': {'phi': 0.5}}
        payload = error_payload(QuadratureError('no convergence', worst_cell={'panel': [1.0, 1.5]}))
        assert payload['type'] == 'QuadratureError'
        assert payload['worst_cell'] == {'panel': [1.0, 1.5]}
