"""
Report emission.

JSON reports are written with sorted keys and no timestamps, so identical
configurations produce identical bytes. Tables go to CSV with a header row.
"""

import csv
import json
import logging
import os

from uclab import __version__
from uclab.config import Config
from uclab.meshkov import FLAGS, GlobalSolution
from uclab.models import RunConfig, _plain

logger = logging.getLogger(__name__)

REPORT_NAME = 'report.json'
MANIFEST_NAME = 'manifest.json'


def _dump(payload) -> str:
    return json.dumps(_plain(payload), sort_keys=True, indent=2, allow_nan=True) + '\n'


def build_report(command: str, config: RunConfig, verdict: str, payload, flags=None):
    return {
        'schema_version': Config.SCHEMA_VERSION,
        'command': command,
        'version': __version__,
        'config': config.to_dict(),
        'flags': flags or {},
        'verdict': verdict,
        'payload': payload,
    }


def write_report(output_dir: str, command: str, config: RunConfig, verdict: str, payload, flags=None) -> str:
    os.makedirs(output_dir, exist_ok=True)
    path = os.path.join(output_dir, REPORT_NAME)
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(_dump(build_report(command, config, verdict, payload, flags)))
    logger.info(f'Wrote {command} report to {path} ({verdict})')
    return path


def read_report(path: str):
    with open(path, encoding='utf-8') as handle:
        return json.load(handle)


def write_csv(output_dir: str, name: str, header, rows) -> str:
    os.makedirs(output_dir, exist_ok=True)
    path = os.path.join(output_dir, name)
    with open(path, 'w', encoding='utf-8', newline='') as csvfile:
        writer = csv.writer(csvfile, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(value) if isinstance(value, float) else value for value in _plain(list(row))])
    logger.info(f'Wrote {len(rows)} rows to {path}')
    return path


def write_manifest(output_dir: str, g: GlobalSolution) -> str:
    os.makedirs(output_dir, exist_ok=True)
    path = os.path.join(output_dir, MANIFEST_NAME)
    manifest = {'schema_version': Config.SCHEMA_VERSION, 'version': __version__, 'flags': FLAGS,
                'solution': g.to_dict()}
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(_dump(manifest))
    return path


def load_manifest(path: str) -> GlobalSolution:
    """Rebuild the solution from its plan; evaluations match the original bit for bit."""
    manifest = read_report(path)
    g = GlobalSolution.from_dict(manifest['solution'])
    logger.info(f'Reloaded {g!r} from {path}')
    return g
