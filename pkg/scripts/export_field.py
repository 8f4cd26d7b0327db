#!/usr/bin/env python3
"""
Field Export Script

Rebuilds a solution from its manifest and writes log|u| and arg u on a polar
grid to CSV.

Usage: python scripts/export_field.py MANIFEST OUTPUT.csv [--radii N] [--angles N]
"""

import argparse
import sys
from pathlib import Path

import numpy as np

# Add the project directory to the Python path
sys.path.insert(0, str(Path(__file__).parent.parent))

from uclab import create_lab  # noqa: E402
from uclab.meshkov import TWO_PI  # noqa: E402
from uclab.reports import load_manifest, write_csv  # noqa: E402


def export_field(manifest_path, output_path, n_radial=64, n_angular=64):
    """Export log|u| and arg u over the manifest's whole radial range"""
    g = load_manifest(manifest_path)
    r = np.linspace(g.r_min, g.r_max, n_radial + 2)[1:-1]
    phi = TWO_PI * np.arange(n_angular) / n_angular
    rr, pp = np.meshgrid(r, phi, indexing='ij')
    log_u = g.log_modulus(rr, pp)
    arg = g.argument(rr, pp)
    rows = [(float(rr[idx]), float(pp[idx]), float(log_u[idx]), float(arg[idx])) for idx in np.ndindex(rr.shape)]

    output = Path(output_path)
    write_csv(str(output.parent), output.name, ['r', 'phi', 'log_modulus', 'argument'], rows)
    print(f"Export completed: {output}")
    print(f"  - {len(rows)} points from {len(g.segments)} annuli")
    return str(output)


def main():
    parser = argparse.ArgumentParser(description='Export a solution field to CSV')
    parser.add_argument('manifest')
    parser.add_argument('output')
    parser.add_argument('--radii', type=int, default=64)
    parser.add_argument('--angles', type=int, default=64)
    args = parser.parse_args()

    create_lab()
    try:
        export_field(args.manifest, args.output, args.radii, args.angles)
    except Exception as e:
        print(f"Error: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
