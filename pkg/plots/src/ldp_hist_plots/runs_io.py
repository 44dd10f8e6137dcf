"""Readers for the simulator's CSV outputs.

Two file formats are understood, both produced by the ldp-hist CLI:

* run records (``simulate``): one row per Monte Carlo repeat with the
  columns listed in ``RUN_COLUMNS``;
* curve tables (``bounds``): one row per (curve, eps) pair with the
  columns in ``BOUND_COLUMNS``.

Loading is strict about headers so that schema drift in either package
shows up as an immediate error instead of a silently wrong figure.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable

import numpy as np

RUN_COLUMNS = (
    "run_id",
    "protocol",
    "eps",
    "k",
    "n",
    "dist",
    "alpha",
    "sampling",
    "seed",
    "linf",
    "l1",
    "l2sq",
    "wall_ms",
)

BOUND_COLUMNS = ("curve", "eps", "value", "constant_known")


def _read_rows(path: str | Path, expected_columns: tuple[str, ...]) -> list[dict]:
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        header = tuple(reader.fieldnames or ())
        if header != expected_columns:
            raise ValueError(
                f"{path}: expected columns {expected_columns}, found {header}"
            )
        return list(reader)


def load_runs(paths: Iterable[str | Path]) -> dict[str, np.ndarray]:
    """Load one or more run-record CSVs into column arrays.

    Rows from all files are concatenated in the order given. Returns a
    dict whose keys are a subset of the CSV columns: string-valued
    ``protocol``, ``dist`` and ``sampling``, float ``eps``, ``alpha``
    (NaN where the column is empty), integer ``k``, ``n``, ``seed`` and
    ``run_id``, and float error metrics ``linf``, ``l1``, ``l2sq``.
    """
    paths = list(paths)
    if not paths:
        raise ValueError("need at least one run CSV")
    rows: list[dict] = []
    for path in paths:
        rows.extend(_read_rows(path, RUN_COLUMNS))
    if not rows:
        raise ValueError("run CSVs contain no data rows")

    def floats(name: str) -> np.ndarray:
        return np.array([float(row[name]) for row in rows])

    def ints(name: str) -> np.ndarray:
        return np.array([int(row[name]) for row in rows])

    return {
        "run_id": ints("run_id"),
        "protocol": np.array([row["protocol"] for row in rows]),
        "eps": floats("eps"),
        "k": ints("k"),
        "n": ints("n"),
        "dist": np.array([row["dist"] for row in rows]),
        "alpha": np.array(
            [float(row["alpha"]) if row["alpha"] != "" else np.nan for row in rows]
        ),
        "sampling": np.array([row["sampling"] for row in rows]),
        "seed": ints("seed"),
        "linf": floats("linf"),
        "l1": floats("l1"),
        "l2sq": floats("l2sq"),
    }


def load_bounds(path: str | Path) -> dict[str, dict[str, np.ndarray]]:
    """Load a curve-table CSV into per-curve arrays.

    Returns ``{curve_name: {"eps": ..., "value": ..., "constant_known":
    bool}}`` with each curve's rows kept in file order (the CLI writes
    them in ascending eps).
    """
    rows = _read_rows(path, BOUND_COLUMNS)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    curves: dict[str, dict] = {}
    for row in rows:
        entry = curves.setdefault(
            row["curve"],
            {"eps": [], "value": [], "constant_known": row["constant_known"]},
        )
        entry["eps"].append(float(row["eps"]))
        entry["value"].append(float(row["value"]))
        if row["constant_known"] != entry["constant_known"]:
            raise ValueError(
                f"{path}: inconsistent constant_known flags for {row['curve']!r}"
            )
    return {
        name: {
            "eps": np.array(entry["eps"]),
            "value": np.array(entry["value"]),
            "constant_known": entry["constant_known"] == "True",
        }
        for name, entry in curves.items()
    }
