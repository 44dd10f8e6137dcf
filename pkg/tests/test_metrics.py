import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from ldp_hist.metrics import (
    ErrorSummary,
    all_errors,
    error,
    percentile_curve,
    percentile_nearest_rank,
)


class TestErrorNorms:
    def test_worked_example(self):
        q = np.array([0.5, 0.3, 0.2])
        est = np.array([0.7, 0.3, 0.0])
        assert error(q, est, "linf") == pytest.approx(0.2)
        assert error(q, est, "l1") == pytest.approx(0.4)
        assert error(q, est, "l2sq") == pytest.approx(0.08)
        assert all_errors(q, est) == pytest.approx((0.2, 0.4, 0.08))

    def test_zero_for_equal_vectors(self):
        q = np.array([0.25, 0.75])
        assert all_errors(q, q) == (0.0, 0.0, 0.0)

    def test_rejects_mismatched_shapes_and_unknown_norms(self):
        with pytest.raises(ValueError):
            error(np.zeros(3), np.zeros(4))
        with pytest.raises(ValueError):
            error(np.zeros(3), np.zeros(3), "l3")

    @given(
        st.lists(st.floats(-1, 1, allow_nan=False, width=32), min_size=2, max_size=64),
    )
    def test_norm_inequalities(self, diffs):
        q = np.zeros(len(diffs))
        est = np.array(diffs, dtype=np.float64)
        linf, l1, l2sq = all_errors(q, est)
        assert linf <= l1 + 1e-12
        assert l2sq <= l1 * linf + 1e-12


class TestNearestRankPercentile:
    def test_small_example(self):
        samples = np.array([3.0, 1.0, 4.0, 2.0])
        assert percentile_nearest_rank(samples, 50) == 2.0
        assert percentile_nearest_rank(samples, 100) == 4.0
        assert percentile_nearest_rank(samples, 0) == 1.0
        assert percentile_nearest_rank(samples, 75) == 3.0
        # Just past a rank boundary moves to the next sample.
        assert percentile_nearest_rank(samples, 50.1) == 3.0

    def test_flat_samples(self):
        assert percentile_nearest_rank(np.full(10, 1.5), 37.3) == 1.5

    def test_domain_checks(self):
        with pytest.raises(ValueError):
            percentile_nearest_rank(np.array([1.0]), 101)
        with pytest.raises(ValueError):
            percentile_nearest_rank(np.array([]), 50)

    @given(
        st.lists(st.floats(0, 10, allow_nan=False, width=32), min_size=1, max_size=40),
        st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=10),
    )
    def test_matches_bruteforce_and_is_monotone(self, samples, grid):
        curve = percentile_curve(np.array(samples), np.array(sorted(grid)))
        for x, got in zip(sorted(grid), curve):
            assert got == oracles.nearest_rank_bruteforce(samples, x)
        assert np.all(np.diff(curve) >= 0)

    @given(st.lists(st.floats(0, 10, allow_nan=False, width=32), min_size=1, max_size=40))
    def test_order_of_samples_is_irrelevant(self, samples):
        a = percentile_nearest_rank(np.array(samples), 62.0)
        b = percentile_nearest_rank(np.array(samples[::-1]), 62.0)
        assert a == b


class TestErrorSummary:
    def test_summaries(self):
        s = ErrorSummary(np.array([4.0, 1.0, 3.0, 2.0]))
        assert s.mean == pytest.approx(2.5)
        assert s.quartiles == (1.0, 2.0, 3.0)
        np.testing.assert_array_equal(s.curve([0, 100]), [1.0, 4.0])

    def test_rejects_negative_errors(self):
        with pytest.raises(ValueError):
            ErrorSummary(np.array([0.1, -0.2]))
