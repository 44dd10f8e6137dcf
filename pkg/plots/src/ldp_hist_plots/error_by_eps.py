"""Log-log figure: error against privacy budget with closed-form curves.

Reads run records spanning several budgets, plots each protocol's median
error (with an interquartile band) against eps on log-log axes, and
overlays curves from a table written by the bounds subcommand. Usage:

    ldp-hist-plot-error-by-eps --csv sweep.csv --bounds-csv curves.csv \
        --out error_by_eps.png
"""

from __future__ import annotations

import argparse

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .runs_io import load_bounds, load_runs


def quartile_series(
    runs: dict[str, np.ndarray], metric: str = "linf"
) -> dict[str, dict[str, np.ndarray]]:
    """Per-protocol eps grid with q25/q50/q75 of the chosen metric."""
    series = {}
    for protocol in sorted(set(runs["protocol"])):
        mask = runs["protocol"] == protocol
        eps_grid = np.unique(runs["eps"][mask])
        quartiles = np.array(
            [
                np.percentile(
                    runs[metric][mask & (runs["eps"] == eps)], [25.0, 50.0, 75.0]
                )
                for eps in eps_grid
            ]
        )
        series[protocol] = {
            "eps": eps_grid,
            "q25": quartiles[:, 0],
            "q50": quartiles[:, 1],
            "q75": quartiles[:, 2],
        }
    return series


def build_figure(
    runs: dict[str, np.ndarray],
    bounds: dict[str, dict[str, np.ndarray]] | None = None,
    metric: str = "linf",
):
    """Build the figure; returns (figure, series, overlays).

    ``overlays`` maps each curve name to its (eps, value) arrays exactly
    as loaded from the table, so callers can check what was drawn.
    """
    series = quartile_series(runs, metric)
    overlays = {
        name: (curve["eps"].copy(), curve["value"].copy())
        for name, curve in (bounds or {}).items()
    }

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for protocol, data in series.items():
        ax.plot(data["eps"], data["q50"], marker="o", markersize=3, label=protocol)
        ax.fill_between(data["eps"], data["q25"], data["q75"], alpha=0.2)
    for name, (eps_grid, values) in overlays.items():
        style = "--" if bounds[name]["constant_known"] else ":"
        ax.plot(eps_grid, values, style, linewidth=1.2, color="black", label=name)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("eps")
    ax.set_ylabel(f"{metric} error")
    ax.set_title("error vs privacy budget")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig, series, overlays


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--csv",
        action="append",
        required=True,
        help="run-record CSV from 'ldp-hist simulate' (repeatable)",
    )
    parser.add_argument("--bounds-csv", help="curve table from 'ldp-hist bounds'")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument(
        "--metric", default="linf", choices=("linf", "l1", "l2sq"), help="error column"
    )
    args = parser.parse_args(argv)

    runs = load_runs(args.csv)
    bounds = load_bounds(args.bounds_csv) if args.bounds_csv else None
    fig, _, _ = build_figure(runs, bounds, args.metric)
    fig.savefig(args.out, dpi=150)
    plt.close(fig)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
