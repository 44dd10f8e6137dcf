"""Shared primitives: frequency vectors, datasets, budgets, seeded streams.

Symbols are always the integers ``0 .. k-1``.  True frequency vectors live on
the probability simplex; estimates produced by the unbiased aggregators are
allowed to leave it (negative entries, sums != 1) and carry ``debiased=True``
to record that no clipping or projection has been applied.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SIMPLEX_ATOL = 1e-9


class CapabilityError(ValueError):
    """A request exceeds what can be enumerated or represented exactly."""


class OutOfRegimeError(ValueError):
    """Parameters fall outside the regime where a formula is valid.

    Attributes carry the admissible boundary so callers can report it.
    """

    def __init__(self, message: str, **limits: float):
        super().__init__(message)
        self.limits = limits


@dataclass(frozen=True)
class PrivacyBudget:
    """An (epsilon, delta) differential privacy budget.

    ``delta=0`` is the pure local model; calculators that need delta > 0
    validate that themselves.
    """

    epsilon: float
    delta: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.epsilon) or self.epsilon <= 0:
            raise ValueError(f"epsilon must be finite and > 0, got {self.epsilon}")
        if not 0.0 <= self.delta <= 1.0:
            raise ValueError(f"delta must be in [0, 1], got {self.delta}")


@dataclass
class FrequencyVector:
    """A length-k vector of symbol frequencies.

    Args:
        values: array of shape (k,), k >= 2.
        debiased: True for aggregator output, which is unbiased but not
            constrained to the simplex.  False enforces the simplex checks.
    """

    values: np.ndarray
    debiased: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1 or self.values.size < 2:
            raise ValueError(f"need a 1-d vector of length >= 2, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("frequencies must be finite")
        if not self.debiased:
            if np.any(self.values < -SIMPLEX_ATOL) or np.any(self.values > 1 + SIMPLEX_ATOL):
                raise ValueError("true frequencies must lie in [0, 1]")
            total = float(self.values.sum())
            if abs(total - 1.0) > SIMPLEX_ATOL:
                raise ValueError(f"true frequencies must sum to 1, got {total}")

    @property
    def k(self) -> int:
        return self.values.size

    def __len__(self) -> int:
        return self.values.size


@dataclass
class Dataset:
    """n user inputs over the alphabet [0, k).

    Args:
        items: integer array of shape (n,), n >= 1, entries in [0, k).
        k: alphabet size, k >= 2.
    """

    items: np.ndarray
    k: int

    def __post_init__(self):
        self.items = np.asarray(self.items)
        if not np.issubdtype(self.items.dtype, np.integer):
            raise ValueError("dataset items must be integers")
        self.items = self.items.astype(np.int64)
        if self.items.ndim != 1 or self.items.size < 1:
            raise ValueError("dataset must hold at least one item")
        if self.k < 2:
            raise ValueError(f"alphabet size must be >= 2, got {self.k}")
        if self.items.min() < 0 or self.items.max() >= self.k:
            raise ValueError(f"items must lie in [0, {self.k})")

    @property
    def n(self) -> int:
        return self.items.size


@dataclass(frozen=True)
class SeedSpec:
    """Addresses one deterministic random stream.

    Streams for distinct ``stream_index`` values are statistically
    independent, so Monte Carlo repeats can be assigned one index each and
    executed in any order, on any number of workers, with identical results.
    """

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_index"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) < 2**64:
                raise ValueError(f"{name} must be an integer in [0, 2**64), got {v!r}")


def derive_stream(seed: SeedSpec) -> np.random.Generator:
    """Returns the generator addressed by ``seed``, always the same one."""
    ss = np.random.SeedSequence(seed.master_seed, spawn_key=(seed.stream_index,))
    return np.random.default_rng(ss)


def empirical_frequencies(dataset: Dataset) -> FrequencyVector:
    """Exact histogram of a dataset, counts / n."""
    counts = np.bincount(dataset.items, minlength=dataset.k)
    return FrequencyVector(counts / dataset.n)


def project_to_simplex(vec: FrequencyVector | np.ndarray) -> FrequencyVector:
    """Euclidean projection of an estimate onto the probability simplex.

    Offered as an optional post-processing step for consumers that need a
    proper distribution.  The aggregators never apply it; doing so would
    trade the unbiasedness contract for feasibility.
    """
    v = vec.values if isinstance(vec, FrequencyVector) else np.asarray(vec, dtype=np.float64)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u * np.arange(1, v.size + 1) > css)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return FrequencyVector(np.maximum(v - theta, 0.0))
