#!/usr/bin/env python3
"""Run the full benchmark grid and emit CSVs, a summary, and a gnuplot script.

The grid crosses n in {10, 20, 30} and mu in {0.01, 0.1} for both engines,
twelve runs total.  Expect the n=30 volumetric runs to dominate the wall time.

Usage:
    python scripts/run_reference_grid.py [--out-dir DIR] [--budget N] [--jobs J]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from cutcert.bench_cli import build_config, run_sweep, write_plotscript  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="grid_output")
    parser.add_argument("--budget", type=int, default=2000)
    parser.add_argument("--cert-every", type=int, default=10)
    parser.add_argument("--jobs", type=int, default=4)
    args = parser.parse_args()

    configs = [
        build_config({
            "method": method,
            "n": n,
            "mu": mu,
            "max_oracle_calls": args.budget,
            "cert_every": args.cert_every,
        })
        for method in ("vaidya", "ellipsoid")
        for n in (10, 20, 30)
        for mu in (0.01, 0.1)
    ]
    summaries, failures = run_sweep(configs, jobs=args.jobs, out_dir=args.out_dir)
    write_plotscript(args.out_dir, Path(args.out_dir) / "plots.gp")
    print(f"wrote {len(summaries)} runs to {args.out_dir}/ "
          f"(summary.txt, plots.gp); {len(failures)} failures")
    for failure in failures:
        print(f"  failed: {failure}")
    return 4 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
