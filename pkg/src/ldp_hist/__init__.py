"""Locally private frequency estimation.

Randomization protocols with unbiased aggregators, a generic budget-splitting
transformation for the low-privacy regime, shuffle-model amplification
calculators, closed-form error-bound curves, and a Monte Carlo harness that
compares all of the above on synthetic data.
"""

from ldp_hist.core import (
    Dataset,
    FrequencyVector,
    PrivacyBudget,
    SeedSpec,
    derive_stream,
    empirical_frequencies,
)

__all__ = [
    "Dataset",
    "FrequencyVector",
    "PrivacyBudget",
    "SeedSpec",
    "derive_stream",
    "empirical_frequencies",
]

__version__ = "0.1.0"
