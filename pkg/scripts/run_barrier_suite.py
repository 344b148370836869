"""Certify the supersolution barrier over a grid of (m, s) pairs.

Each pair builds the explicit barrier profile, certifies the operator
inequality on a dense grid, and records the derived constants. Budget
a few minutes per pair at the default certification grid.

    python scripts/run_barrier_suite.py --out studies/barrier
    python scripts/run_barrier_suite.py --cert-points 1024   # quick look
"""

import argparse
import csv
import os
import sys

from nlac.cli import EXIT_OK, main as run_pipeline
from nlac.config import (BarrierConfig, ExperimentConfig, KernelConfig,
                         save_config)


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="studies/barrier")
    ap.add_argument("--m", type=float, nargs="+", default=[2.0, 3.0])
    ap.add_argument("--s", type=float, nargs="+", default=[0.3, 0.5])
    ap.add_argument("--zeta", type=float, default=0.1)
    ap.add_argument("--probe-points", type=int, default=384)
    ap.add_argument("--cert-points", type=int, default=4096)
    ap.add_argument("--workers", type=int, default=None)
    return ap.parse_args()


def main():
    args = parse_args()
    os.makedirs(args.out, exist_ok=True)
    rows = []
    worst = EXIT_OK
    for m in args.m:
        for s in args.s:
            run_dir = os.path.join(args.out, f"m{m:g}_s{s:g}")
            os.makedirs(run_dir, exist_ok=True)
            cfg = ExperimentConfig(
                kernel=KernelConfig(params={"s": s}),
                barrier=BarrierConfig(m=m, zeta=args.zeta,
                                      probe_points=args.probe_points,
                                      cert_points=args.cert_points),
                out_dir=run_dir,
            )
            cfg_path = os.path.join(run_dir, "config.yaml")
            save_config(cfg_path, cfg)
            argv = ["barrier", "--config", cfg_path]
            if args.workers is not None:
                argv += ["--workers", str(args.workers)]
            print(f"== m = {m:g}, s = {s:g} -> {run_dir}")
            code = run_pipeline(argv)
            worst = max(worst, code)
            with open(os.path.join(run_dir, "barrier_summary.txt")) as fh:
                passed = all(line.startswith(("PASS", "spec:"))
                             for line in fh if line.strip())
            rows.append({"m": m, "s": s, "zeta": args.zeta,
                         "passed": passed, "exit": code})

    path = os.path.join(args.out, "summary.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["m", "s", "zeta", "passed",
                                                "exit"])
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {path}")
    return worst


if __name__ == "__main__":
    sys.exit(main())
