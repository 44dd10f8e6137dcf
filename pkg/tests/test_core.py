import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldp_hist.core import (
    Dataset,
    FrequencyVector,
    PrivacyBudget,
    SeedSpec,
    derive_stream,
    empirical_frequencies,
    project_to_simplex,
)


class TestPrivacyBudget:
    def test_accepts_pure_and_approximate_budgets(self):
        PrivacyBudget(0.5)
        PrivacyBudget(5.0, delta=1e-6)

    @pytest.mark.parametrize("eps", [0.0, -1.0, float("inf"), float("nan")])
    def test_rejects_bad_epsilon(self, eps):
        with pytest.raises(ValueError):
            PrivacyBudget(eps)

    @pytest.mark.parametrize("delta", [-0.1, 1.5])
    def test_rejects_bad_delta(self, delta):
        with pytest.raises(ValueError):
            PrivacyBudget(1.0, delta=delta)


class TestFrequencyVector:
    def test_true_vector_must_be_on_simplex(self):
        FrequencyVector(np.array([0.5, 0.5]))
        with pytest.raises(ValueError):
            FrequencyVector(np.array([0.6, 0.6]))
        with pytest.raises(ValueError):
            FrequencyVector(np.array([-0.2, 1.2]))

    def test_debiased_vector_may_leave_simplex(self):
        fv = FrequencyVector(np.array([-0.2, 0.9, 0.4]), debiased=True)
        assert fv.k == 3

    def test_rejects_scalars_and_short_vectors(self):
        with pytest.raises(ValueError):
            FrequencyVector(np.array([1.0]))
        with pytest.raises(ValueError):
            FrequencyVector(np.array([[0.5, 0.5]]))

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            FrequencyVector(np.array([np.nan, 1.0]), debiased=True)


class TestDataset:
    def test_basic_shape_and_range_checks(self):
        d = Dataset(np.array([0, 1, 1, 2]), k=3)
        assert d.n == 4
        with pytest.raises(ValueError):
            Dataset(np.array([0, 3]), k=3)
        with pytest.raises(ValueError):
            Dataset(np.array([], dtype=np.int64), k=3)
        with pytest.raises(ValueError):
            Dataset(np.array([0.5, 1.0]), k=3)


class TestEmpiricalFrequencies:
    def test_small_example(self):
        d = Dataset(np.array([0, 1, 1, 3]), k=4)
        np.testing.assert_allclose(
            empirical_frequencies(d).values, [0.25, 0.5, 0.0, 0.25]
        )

    def test_uniform_draws_concentrate(self):
        # 1000 uniform draws over 500 symbols: every frequency within five
        # standard errors of 1/500.
        rng = derive_stream(SeedSpec(7, 0))
        d = Dataset(rng.integers(0, 500, size=1000), k=500)
        freqs = empirical_frequencies(d).values
        se = np.sqrt((1 / 500) * (499 / 500) / 1000)
        assert np.all(np.abs(freqs - 1 / 500) <= 5 * se)

    @given(st.lists(st.integers(0, 5), min_size=1, max_size=50))
    def test_invariant_under_permutation(self, items):
        d = np.array(items, dtype=np.int64)
        a = empirical_frequencies(Dataset(d, k=6)).values
        b = empirical_frequencies(Dataset(d[::-1].copy(), k=6)).values
        np.testing.assert_array_equal(a, b)
        assert a.sum() == pytest.approx(1.0, abs=1e-12)


class TestSeededStreams:
    def test_same_spec_same_draws(self):
        a = derive_stream(SeedSpec(123, 4)).random(8)
        b = derive_stream(SeedSpec(123, 4)).random(8)
        np.testing.assert_array_equal(a, b)

    def test_different_indices_differ(self):
        a = derive_stream(SeedSpec(123, 0)).random(8)
        b = derive_stream(SeedSpec(123, 1)).random(8)
        assert not np.array_equal(a, b)

    def test_streams_are_not_shifted_copies(self):
        # Consecutive indices must not produce overlapping sequences.
        a = derive_stream(SeedSpec(9, 0)).random(64)
        b = derive_stream(SeedSpec(9, 1)).random(64)
        for shift in range(1, 32):
            assert not np.allclose(a[shift:], b[: 64 - shift])

    @pytest.mark.parametrize("bad", [-1, 2**64, 1.5])
    def test_rejects_out_of_range_seeds(self, bad):
        with pytest.raises(ValueError):
            SeedSpec(bad, 0)
        with pytest.raises(ValueError):
            SeedSpec(0, bad)


class TestSimplexProjection:
    def test_already_feasible_is_unchanged(self):
        v = np.array([0.2, 0.3, 0.5])
        np.testing.assert_allclose(project_to_simplex(v).values, v, atol=1e-12)

    def test_clips_negative_mass(self):
        got = project_to_simplex(np.array([1.2, -0.2, 0.0])).values
        assert got == pytest.approx([1.0, 0.0, 0.0], abs=1e-12)

    @settings(max_examples=50)
    @given(
        st.lists(st.floats(-2, 2, allow_nan=False, allow_infinity=False), min_size=2, max_size=12)
    )
    def test_output_is_closest_simplex_point(self, vals):
        v = np.array(vals)
        got = project_to_simplex(v).values
        assert np.all(got >= -1e-12)
        assert got.sum() == pytest.approx(1.0, abs=1e-9)
        # No feasible perturbation should be closer.
        rng = np.random.default_rng(0)
        for _ in range(20):
            other = rng.dirichlet(np.ones(v.size))
            assert np.sum((got - v) ** 2) <= np.sum((other - v) ** 2) + 1e-9
