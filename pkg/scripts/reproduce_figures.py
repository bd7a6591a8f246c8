"""Write the datasets for every figure id into one directory tree.

    python scripts/reproduce_figures.py [OUT_DIR] [--format json]
"""

import argparse
import sys
from pathlib import Path

from qzeno.cli import FIGURES, main


def run(out_dir, fmt="csv", tau_points=150):
    out_dir = Path(out_dir)
    for fig_id in sorted(FIGURES):
        argv = ["figure", fig_id, "--out", str(out_dir / f"figure_{fig_id}"), "--format", fmt,
                "--tau-points", str(tau_points)]
        code = main(argv)
        if code:
            return code
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out_dir", nargs="?", default="figures")
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    ap.add_argument("--tau-points", type=int, default=150)
    args = ap.parse_args()
    sys.exit(run(args.out_dir, args.format, args.tau_points))
