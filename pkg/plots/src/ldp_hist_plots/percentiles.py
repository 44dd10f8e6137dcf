"""Percentile figure: per-protocol error distribution at a fixed budget.

Reads run records for a single privacy budget, sorts each protocol's
per-repeat errors, and plots error against percentile level on a log
scale, optionally overlaying horizontal lines from a curve table at the
same budget. Usage:

    ldp-hist-plot-percentiles --csv runs_a.csv --csv runs_b.csv \
        --bounds-csv bounds.csv --out percentiles.png
"""

from __future__ import annotations

import argparse

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .runs_io import load_bounds, load_runs

EPS_MATCH_TOL = 1e-12


def percentile_series(
    runs: dict[str, np.ndarray], metric: str = "linf"
) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Sorted error values per protocol with their percentile levels.

    For a protocol with R repeats the r-th smallest error (1-based) is
    placed at level 100*r/R, so the largest error sits at the 100th
    percentile and the curve is the inverse empirical CDF.
    """
    series = {}
    for protocol in sorted(set(runs["protocol"])):
        values = np.sort(runs[metric][runs["protocol"] == protocol])
        levels = 100.0 * np.arange(1, values.size + 1) / values.size
        series[protocol] = (levels, values)
    return series


def single_eps(runs: dict[str, np.ndarray]) -> float:
    eps_values = np.unique(runs["eps"])
    if eps_values.size != 1:
        raise ValueError(
            f"percentile figure needs runs at a single eps, found {eps_values.tolist()}"
        )
    return float(eps_values[0])


def overlay_values(
    bounds: dict[str, dict[str, np.ndarray]], eps: float
) -> dict[str, float]:
    """Pick each curve's value at the given budget from a curve table."""
    overlays = {}
    for name, curve in bounds.items():
        matches = np.nonzero(np.abs(curve["eps"] - eps) <= EPS_MATCH_TOL)[0]
        if matches.size == 0:
            raise ValueError(f"curve {name!r} has no row at eps={eps}")
        overlays[name] = float(curve["value"][matches[0]])
    return overlays


def build_figure(
    runs: dict[str, np.ndarray],
    bounds: dict[str, dict[str, np.ndarray]] | None = None,
    metric: str = "linf",
):
    """Build the figure; returns (figure, series, overlays)."""
    eps = single_eps(runs)
    series = percentile_series(runs, metric)
    overlays = overlay_values(bounds, eps) if bounds else {}

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for protocol, (levels, values) in series.items():
        ax.plot(levels, np.maximum(values, 1e-300), label=protocol)
    for name, value in overlays.items():
        ax.axhline(value, linestyle="--", linewidth=1.0, label=name)
    ax.set_yscale("log")
    ax.set_xlabel("percentile")
    ax.set_ylabel(f"{metric} error")
    ax.set_title(f"error percentiles, eps={eps:g}")
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
