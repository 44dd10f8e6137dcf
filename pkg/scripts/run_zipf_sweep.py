#!/usr/bin/env python3
"""Input-skew sweep: error of each protocol across Zipf exponents.

One runs-CSV row per repeat, across a grid of Zipf exponents from uniform
(alpha 0) to a degenerate point mass (alpha 2000).  The defaults match the
distribution-dependence comparison (eps=5, k=500, n=1000, 1000 repeats).
"""

import argparse

from ldp_hist.cli import ExperimentConfig, simulate, write_run_csv

PROTOCOLS = ["rappor", "ss", "pgr", "hr"]
ALPHAS = ["0", "0.5", "1", "1.5", "2", "3", "2000"]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="zipf_runs.csv")
    ap.add_argument("--repeats", type=int, default=1000)
    ap.add_argument("--eps", type=float, default=5.0)
    ap.add_argument("--k", type=int, default=500)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--protocols", nargs="*", default=PROTOCOLS)
    ap.add_argument("--alphas", nargs="*", default=ALPHAS)
    ap.add_argument("--quick", action="store_true", help="50 repeats over three exponents")
    args = ap.parse_args(argv)
    if args.quick:
        args.repeats, args.alphas = 50, ["0", "1", "2000"]

    records = []
    for name in args.protocols:
        for alpha in args.alphas:
            config = ExperimentConfig(
                protocol=name, eps=args.eps, k=args.k, n=args.n,
                dist=f"zipf:{alpha}", repeats=args.repeats, seed=args.seed,
            )
            records += simulate(config)
        print(f"{name}: {len(args.alphas)} exponents done")
    write_run_csv(records, args.out)
    print(f"wrote {len(records)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
