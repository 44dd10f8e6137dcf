import math

import numpy as np
import pytest

import oracles
from ldp_hist.core import CapabilityError
from ldp_hist.geometry import build_hadamard_system, build_projective_system
from ldp_hist.protocols import (
    IntersectionFamilyProtocol,
    KRandomizedResponse,
    Rappor,
    SubsetSelection,
    base_protocol,
    hadamard_protocol,
    max_privacy_ratio,
    output_matrix,
    pgr_protocol,
)

LN2 = math.log(2)
LN4 = math.log(4)


def fano_protocol(k=7, eps=LN2):
    return IntersectionFamilyProtocol("pgr", k, eps, build_projective_system(2, 3))


class TestFrozenParameters:
    def test_krr_at_eps_ln3(self):
        proto = KRandomizedResponse(4, math.log(3))
        assert proto.p_keep == pytest.approx(0.5)
        assert proto.p_other == pytest.approx(1 / 6)

    def test_rappor_at_eps_two(self):
        proto = Rappor(8, 2.0)
        assert proto.flip_prob == pytest.approx(0.2689414213699951, rel=1e-12)
        assert proto.scale == pytest.approx(2.163953413738653, rel=1e-12)
        assert proto.offset == pytest.approx(0.5819767068693265, rel=1e-12)

    def test_subset_selection_at_eps_ln4(self):
        proto = SubsetSelection(10, LN4)
        assert proto.s == 2
        assert proto.p_include == pytest.approx(0.5)
        assert proto.p1 == pytest.approx(0.5)
        assert proto.p0 == pytest.approx(1 / 6)

    def test_fano_plane_debias_line(self):
        proto = fano_protocol()
        assert proto.p_inside == pytest.approx(0.6)
        assert proto.alpha == pytest.approx(5.0)
        assert proto.beta == pytest.approx(-2.0)

    def test_hadamard_debias_line(self):
        proto = IntersectionFamilyProtocol("hr", 3, math.log(3), build_hadamard_system(3))
        assert proto.p_inside == pytest.approx(0.75)
        assert proto.alpha == pytest.approx(4.0)
        assert proto.beta == pytest.approx(-2.0)

    @pytest.mark.parametrize(
        "proto",
        [fano_protocol(), pgr_protocol(13, LN2), hadamard_protocol(6, 1.0)],
        ids=["fano", "pgr-13", "hr-6"],
    )
    def test_affine_identity_recovers_indicators(self, proto):
        # A user holding x lands in S(x) with rate p_inside; one holding
        # x' != x lands there via the c-overlap or from outside.  The debias
        # line must map those two rates to 1 and 0.
        sys = proto.system
        rate_self = proto.p_inside
        rate_other = proto.p_inside * sys.c / sys.s + (1 - proto.p_inside) * (
            sys.s - sys.c
        ) / (sys.m - sys.s)
        assert proto.alpha * rate_self + proto.beta == pytest.approx(1.0, abs=1e-12)
        assert proto.alpha * rate_other + proto.beta == pytest.approx(0.0, abs=1e-12)


def small_protocols():
    return [
        KRandomizedResponse(5, 1.3),
        Rappor(6, 0.8),
        SubsetSelection(7, 1.0),
        fano_protocol(),
        pgr_protocol(5, LN2),
        hadamard_protocol(6, 1.7),
    ]


class TestExactUnbiasedness:
    @pytest.mark.parametrize("proto", small_protocols(), ids=lambda p: f"{p.name}-k{p.k}")
    def test_expected_estimate_equals_truth(self, proto):
        rng = np.random.default_rng(42)
        for _ in range(20):
            q = rng.dirichlet(np.full(proto.k, 0.7))
            expected = oracles.expected_estimate(proto, q)
            np.testing.assert_allclose(expected, q, atol=1e-9)

    def test_point_masses_are_recovered(self):
        proto = fano_protocol()
        for x in range(proto.k):
            q = np.zeros(proto.k)
            q[x] = 1.0
            np.testing.assert_allclose(oracles.expected_estimate(proto, q), q, atol=1e-9)


class TestPrivacyAudit:
    @pytest.mark.parametrize("eps", [0.5, 1.0, LN4, 3.0])
    @pytest.mark.parametrize("name,k", [("krr", 10), ("rappor", 8), ("ss", 8), ("hr", 8)])
    def test_budget_is_met_exactly(self, name, k, eps):
        proto = base_protocol(name, k, eps)
        ratio = max_privacy_ratio(proto)
        assert ratio <= math.exp(eps) * (1 + 1e-9)
        assert ratio == pytest.approx(math.exp(eps), rel=1e-9)

    @pytest.mark.parametrize("proto", [fano_protocol(), pgr_protocol(13, 1.0)], ids=["fano", "pgr-13"])
    def test_projective_budget_is_met_exactly(self, proto):
        ratio = max_privacy_ratio(proto)
        assert ratio == pytest.approx(math.exp(proto.eps), rel=1e-9)

    def test_module_audit_agrees_with_oracle(self):
        for proto in [KRandomizedResponse(4, 1.0), SubsetSelection(6, 1.0), fano_protocol()]:
            assert max_privacy_ratio(proto) == pytest.approx(
                oracles.worst_case_ratio(proto), rel=1e-12
            )


def message_key(proto):
    """Map a sampled message to its index in enumerate_messages."""
    if isinstance(proto, Rappor):
        weights = 1 << np.arange(proto.k)
        return lambda m: int(np.asarray(m, dtype=np.int64) @ weights)
    if isinstance(proto, SubsetSelection):
        index = {tuple(m.tolist()): i for i, m in enumerate(proto.enumerate_messages())}
        return lambda m: index[tuple(np.asarray(m).tolist())]
    return int


class TestSamplersMatchExactDistributions:
    @pytest.mark.parametrize(
        "proto",
        [
            KRandomizedResponse(10, 1.0),
            Rappor(6, 0.8),
            SubsetSelection(8, 1.0),
            pgr_protocol(13, LN2),
            hadamard_protocol(6, 1.0),
        ],
        ids=lambda p: f"{p.name}-k{p.k}",
    )
    def test_batch_sampler_frequencies(self, proto):
        x = 2
        draws = 60_000
        rng = np.random.default_rng(2024)
        messages = proto.randomize_batch(np.full(draws, x), rng)
        key = message_key(proto)
        probs = proto.output_distribution(x)
        counts = np.zeros(probs.size)
        for m in messages:
            counts[key(m)] += 1
        emp = counts / draws
        se = np.sqrt(probs * (1 - probs) / draws)
        np.testing.assert_array_less(np.abs(emp - probs), 5 * se + 1e-12)

    @pytest.mark.parametrize("proto", small_protocols(), ids=lambda p: f"{p.name}-k{p.k}")
    def test_single_draw_lands_in_message_space(self, proto):
        rng = np.random.default_rng(7)
        key = message_key(proto)
        n_messages = len(proto.enumerate_messages())
        for x in [0, proto.k - 1]:
            for _ in range(5):
                assert 0 <= key(proto.randomize(x, rng)) < n_messages


class TestMonteCarloAggregation:
    def test_rappor_pipeline_is_unbiased(self):
        proto = Rappor(16, 2.0)
        xs = np.repeat(np.arange(16), np.array([9, 7, 6, 6, 5, 4, 4, 4, 3, 3, 3, 2, 2, 2, 2, 2]))
        truth = np.bincount(xs, minlength=16) / xs.size
        rng = np.random.default_rng(99)
        reps = 4000
        estimates = np.stack(
            [proto.aggregate(proto.randomize_batch(xs, rng)).values for _ in range(reps)]
        )
        gap = np.abs(estimates.mean(axis=0) - truth)
        se = estimates.std(axis=0, ddof=1) / math.sqrt(reps)
        np.testing.assert_array_less(gap, 4.5 * se)

    def test_subset_selection_pipeline_is_unbiased(self):
        proto = SubsetSelection(8, 1.0)
        xs = np.repeat(np.arange(8), np.array([15, 10, 8, 6, 5, 3, 2, 1]))
        truth = np.bincount(xs, minlength=8) / xs.size
        rng = np.random.default_rng(100)
        reps = 4000
        estimates = np.stack(
            [proto.aggregate(proto.randomize_batch(xs, rng)).values for _ in range(reps)]
        )
        gap = np.abs(estimates.mean(axis=0) - truth)
        se = estimates.std(axis=0, ddof=1) / math.sqrt(reps)
        np.testing.assert_array_less(gap, 4.5 * se)


class TestHighBudgetLimits:
    def test_rappor_becomes_lossless(self):
        proto = Rappor(5, 200.0)
        rng = np.random.default_rng(0)
        xs = np.array([0, 1, 1, 3, 4, 4, 4])
        bits = proto.randomize_batch(xs, rng)
        np.testing.assert_array_equal(bits.sum(axis=1), 1)
        np.testing.assert_array_equal(np.argmax(bits, axis=1), xs)
        est = proto.aggregate(bits).values
        np.testing.assert_allclose(est, np.bincount(xs, minlength=5) / xs.size, atol=1e-12)

    def test_krr_becomes_lossless(self):
        proto = KRandomizedResponse(5, 200.0)
        rng = np.random.default_rng(0)
        xs = np.array([0, 2, 2, 4])
        np.testing.assert_array_equal(proto.randomize_batch(xs, rng), xs)


class TestUniverseAggregation:
    def test_padding_rows_are_present(self):
        proto = pgr_protocol(5, LN2)
        rng = np.random.default_rng(8)
        msgs = proto.randomize_batch(np.zeros(50, dtype=np.int64), rng)
        est = proto.aggregate(msgs).values
        full = proto.aggregate_universe(msgs).values
        assert est.shape == (5,)
        assert full.shape == (proto.system.capacity,)
        np.testing.assert_allclose(full[:5], est, atol=1e-12)

    @pytest.mark.parametrize("proto", [fano_protocol(), pgr_protocol(13, 1.0)], ids=["fano", "pgr-13"])
    def test_projective_universe_estimates_sum_to_one(self, proto):
        # Every universe point lies in exactly s member sets, which forces
        # the full debiased vector to sum to one for any message multiset.
        rng = np.random.default_rng(21)
        for _ in range(10):
            msgs = rng.integers(0, proto.system.m, size=rng.integers(1, 400))
            total = proto.aggregate_universe(msgs).values.sum()
            assert total == pytest.approx(1.0, abs=1e-9)


class TestValidation:
    def test_output_matrix_columns_are_distributions(self):
        for proto in small_protocols():
            mat = output_matrix(proto)
            np.testing.assert_allclose(mat.sum(axis=0), 1.0, atol=1e-12)
            assert (mat > 0).all()

    def test_rappor_enumeration_cap(self):
        with pytest.raises(CapabilityError):
            Rappor(13, 1.0).enumerate_messages()

    def test_subset_enumeration_cap(self):
        with pytest.raises(CapabilityError):
            SubsetSelection(30, 0.1).enumerate_messages()

    def test_unknown_protocol_name(self):
        with pytest.raises(ValueError):
            base_protocol("oracle", 4, 1.0)

    def test_rejects_tiny_alphabets_and_budgets(self):
        with pytest.raises(ValueError):
            KRandomizedResponse(1, 1.0)
        with pytest.raises(ValueError):
            KRandomizedResponse(4, 0.0)

    def test_rejects_out_of_range_inputs(self):
        proto = KRandomizedResponse(4, 1.0)
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            proto.randomize_batch(np.array([0, 4]), rng)
        with pytest.raises(ValueError):
            proto.randomize_batch(np.array([-1]), rng)

    def test_rejects_empty_aggregation(self):
        with pytest.raises(ValueError):
            KRandomizedResponse(4, 1.0).aggregate([])
        with pytest.raises(ValueError):
            Rappor(4, 1.0).aggregate(np.zeros((0, 4), dtype=np.uint8))
        with pytest.raises(ValueError):
            SubsetSelection(6, 1.0).aggregate(np.zeros((0, 2), dtype=np.int64))

    def test_subset_size_override_bounds(self):
        with pytest.raises(ValueError):
            SubsetSelection(6, 1.0, s=0)
        with pytest.raises(ValueError):
            SubsetSelection(6, 1.0, s=6)

    def test_alphabet_larger_than_system_capacity(self):
        with pytest.raises(ValueError):
            IntersectionFamilyProtocol("hr", 4, 1.0, build_hadamard_system(3))

    def test_message_bit_reporting(self):
        assert KRandomizedResponse(16, 1.0).message_bits == 4
        assert Rappor(16, 1.0).message_bits == 16
        assert hadamard_protocol(6, 1.0).message_bits == 3
        assert fano_protocol().message_bits == 3
        assert SubsetSelection(10, LN4).message_bits == 8
