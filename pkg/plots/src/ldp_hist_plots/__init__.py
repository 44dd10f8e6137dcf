"""Plotting companion for the ldp-hist simulator.

This package never imports the simulator. It consumes its two CSV
interfaces: per-run error records written by ``ldp-hist simulate`` and
closed-form curve tables written by ``ldp-hist bounds``.
"""

from .runs_io import RUN_COLUMNS, BOUND_COLUMNS, load_runs, load_bounds

__all__ = ["RUN_COLUMNS", "BOUND_COLUMNS", "load_runs", "load_bounds"]
