import csv
import json
import sys
from pathlib import Path

import numpy as np
import pytest

from uclab.meshkov import assemble_global, plan_annuli
from uclab.models import RunConfig
from uclab.reports import build_report, load_manifest, write_csv, write_manifest, write_report

sys.path.insert(0, str(Path(__file__).parent.parent / 'scripts'))

from export_field import export_field  # noqa: E402


@pytest.fixture(scope='module')
def solution():
    """Two-annulus solution from rho = 200"""
    return assemble_global(plan_annuli(200.0, 300.0))


class TestReports:
    def test_envelope(self):
        """Every report carries the schema version, the command and the full configuration"""
        report = build_report('build', RunConfig(), 'pass', {'annuli': 2})
        assert report['schema_version'] == 1
        assert report['config']['construction']['rho1'] == 200.0
        assert report['flags'] == {}

    def test_sorted_keys_and_nan(self, output_dir):
        """Keys are sorted and non-finite floats survive"""
        path = write_report(str(output_dir), 'decay', RunConfig(), 'fail', {'b': float('nan'), 'a': 1})
        text = Path(path).read_text(encoding='utf-8')
        assert text.index('"command"') < text.index('"config"') < text.index('"payload"')
        assert np.isnan(json.loads(text)['payload']['b'])

    def test_csv_keeps_float_precision(self, output_dir):
        """Floats are written with repr"""
        path = write_csv(str(output_dir), 'table.csv', ['x', 'name'], [(0.1 + 0.2, 'a'), (np.float64(1 / 3), 'b')])
        with open(path, newline='', encoding='utf-8') as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ['x', 'name']
        assert float(rows[1][0]) == 0.1 + 0.2
        assert float(rows[2][0]) == 1 / 3


class TestManifest:
    def test_reload_matches(self, solution, output_dir):
        """The manifest reproduces the field bit for bit"""
        path = write_manifest(str(output_dir), solution)
        reloaded = load_manifest(path)
        r = np.array([205.0, 260.0, 290.0])
        phi = np.array([0.3, 1.7, 5.9])
        np.testing.assert_array_equal(reloaded.log_modulus(r, phi), solution.log_modulus(r, phi))
        np.testing.assert_array_equal(reloaded.argument(r, phi), solution.argument(r, phi))

    def test_export_field(self, solution, output_dir):
        """The export script writes one row per grid point"""
        manifest = write_manifest(str(output_dir), solution)
        target = output_dir / 'field_export.csv'
        export_field(manifest, str(target), n_radial=4, n_angular=8)
        with open(target, newline='', encoding='utf-8') as handle:
            rows = list(csv.reader(handle))
        assert rows[0] == ['r', 'phi', 'log_modulus', 'argument']
        assert len(rows) == 4 * 8 + 1
