"""Error norms and percentile summaries for estimated frequency vectors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ldp_hist.core import FrequencyVector

NORMS = ("linf", "l1", "l2sq")


def _values(vec) -> np.ndarray:
    return vec.values if isinstance(vec, FrequencyVector) else np.asarray(vec, dtype=np.float64)


def error(truth, estimate, norm: str = "linf") -> float:
    """Distance between a true and an estimated frequency vector.

    ``l2sq`` is the squared Euclidean norm, not its root, so that values
    line up with the usual mean-squared-error analyses.
    """
    t, e = _values(truth), _values(estimate)
    if t.shape != e.shape:
        raise ValueError(f"shape mismatch: {t.shape} vs {e.shape}")
    d = e - t
    if norm == "linf":
        return float(np.max(np.abs(d)))
    if norm == "l1":
        return float(np.sum(np.abs(d)))
    if norm == "l2sq":
        return float(np.sum(d * d))
    raise ValueError(f"unknown norm {norm!r}, expected one of {NORMS}")


def all_errors(truth, estimate) -> tuple[float, float, float]:
    """(linf, l1, l2sq) in one pass."""
    t, e = _values(truth), _values(estimate)
    if t.shape != e.shape:
        raise ValueError(f"shape mismatch: {t.shape} vs {e.shape}")
    d = np.abs(e - t)
    return float(d.max()), float(d.sum()), float(np.sum(d * d))


def percentile_nearest_rank(samples: np.ndarray, x: float) -> float:
    """The x-th percentile of ``samples`` under the nearest-rank definition.

    The value returned is always one of the samples: the element with
    1-based rank ceil(x/100 * R) in ascending order, clamped to [1, R].
    """
    if not 0.0 <= x <= 100.0:
        raise ValueError(f"percentile must be in [0, 100], got {x}")
    s = np.sort(np.asarray(samples, dtype=np.float64))
    if s.size == 0:
        raise ValueError("need at least one sample")
    rank = min(max(math.ceil(x / 100.0 * s.size), 1), s.size)
    return float(s[rank - 1])


def percentile_curve(samples: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Nearest-rank percentiles of ``samples`` at each point of ``grid``."""
    s = np.sort(np.asarray(samples, dtype=np.float64))
    if s.size == 0:
        raise ValueError("need at least one sample")
    out = np.empty(len(grid), dtype=np.float64)
    for i, x in enumerate(grid):
        if not 0.0 <= x <= 100.0:
            raise ValueError(f"percentile must be in [0, 100], got {x}")
        rank = min(max(math.ceil(x / 100.0 * s.size), 1), s.size)
        out[i] = s[rank - 1]
    return out


@dataclass
class ErrorSummary:
    """Per-repeat errors of one experiment plus their usual summaries."""

    errors: np.ndarray

    def __post_init__(self):
        self.errors = np.asarray(self.errors, dtype=np.float64)
        if self.errors.ndim != 1 or self.errors.size == 0:
            raise ValueError("need a non-empty 1-d array of errors")
        if np.any(self.errors < 0):
            raise ValueError("errors are nonnegative by definition")

    @property
    def mean(self) -> float:
        return float(self.errors.mean())

    @property
    def median(self) -> float:
        return self.percentile(50.0)

    @property
    def quartiles(self) -> tuple[float, float, float]:
        return (self.percentile(25.0), self.percentile(50.0), self.percentile(75.0))

    def percentile(self, x: float) -> float:
        return percentile_nearest_rank(self.errors, x)

    def curve(self, grid) -> np.ndarray:
        return percentile_curve(self.errors, np.asarray(grid, dtype=np.float64))
