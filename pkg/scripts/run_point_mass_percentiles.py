#!/usr/bin/env python3
"""Point-mass benchmark: every protocol at one (eps, k, n) setting.

Runs the full protocol lineup on a point-mass dataset and writes a single
runs CSV suitable for the percentile plot.  The defaults reproduce the
headline comparison (eps=5, k=5000, n=2000, 1000 repeats); --quick drops to
a smoke-test size that finishes in seconds.
"""

import argparse

from ldp_hist.cli import ExperimentConfig, simulate, write_run_csv

PROTOCOLS = ["krr", "rappor", "ss", "hr", "pgr", "split(krr)"]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="percentiles_runs.csv")
    ap.add_argument("--repeats", type=int, default=1000)
    ap.add_argument("--eps", type=float, default=5.0)
    ap.add_argument("--k", type=int, default=5000)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=5)
    ap.add_argument("--protocols", nargs="*", default=PROTOCOLS)
    ap.add_argument("--quick", action="store_true", help="50 repeats at k=500 for a fast pass")
    args = ap.parse_args(argv)
    if args.quick:
        args.repeats, args.k = 50, 500

    records = []
    for name in args.protocols:
        config = ExperimentConfig(
            protocol=name, eps=args.eps, k=args.k, n=args.n,
            dist="point_mass", repeats=args.repeats, seed=args.seed,
        )
        records += simulate(config)
        print(f"{name}: {args.repeats} repeats done")
    write_run_csv(records, args.out)
    print(f"wrote {len(records)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
