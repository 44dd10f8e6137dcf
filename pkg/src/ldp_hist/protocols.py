"""Local randomization protocols and their unbiased aggregators.

Every protocol here satisfies pure eps-local differential privacy: for any
two inputs x, x' and any message y, P(y | x) <= e^eps * P(y | x').  Each one
also ships an aggregator that is exactly unbiased for the dataset's
empirical frequencies, with no clipping or projection applied.

Protocols:
    * k-ary randomized response ("krr"): report the truth with probability
      e^eps / (e^eps + k - 1), otherwise a uniform other symbol.
    * RAPPOR ("rappor"), simplified one-hot flavor: one-hot encode, then
      flip each bit independently with probability 1 / (e^{eps/2} + 1).
      (Erlingsson, Pihur and Korolova, CCS 2014.)
    * Subset selection ("ss"): report a random size-s subset, favoring
      subsets containing the input by a factor e^eps.
    * Intersection-family response over a uniform set system: report a
      random message, favoring the member set S(x) by a factor e^eps.
      Instantiated with a projective-geometry system ("pgr", after Feldman,
      Nelson, Nguyen and Talwar, ICML 2022) or a Sylvester-Hadamard system
      ("hr").
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ldp_hist.core import CapabilityError, FrequencyVector, PrivacyBudget
from ldp_hist.geometry import SetSystem, build_hadamard_system, build_pgr_system

# Caps for exact message-space enumeration (output matrices, audits).
RAPPOR_ENUM_MAX_K = 12
ENUM_MAX_MESSAGES = 200_000


def _inv_exp1p(x: float) -> float:
    """1 / (e^x + 1), safe for arbitrarily large x."""
    return 0.0 if x > 700 else 1.0 / (1.0 + math.exp(x))


def _inv_expm1(x: float) -> float:
    """1 / (e^x - 1), safe for arbitrarily large x."""
    if x <= 0:
        raise ValueError(f"need x > 0, got {x}")
    return 0.0 if x > 700 else 1.0 / math.expm1(x)


@dataclass(frozen=True)
class ProtocolDescriptor:
    name: str
    k: int
    eps: float
    message_space: str
    message_bits: int


class LocalProtocol:
    """Contract shared by all randomizers.

    Attributes:
        name: short identifier used in CLI flags and CSV rows.
        k: input alphabet size; inputs are integers in [0, k).
        eps: the pure local privacy budget.
    """

    name: str
    k: int
    eps: float

    def __init__(self, k: int, eps: float):
        if k < 2:
            raise ValueError(f"need k >= 2, got {k}")
        PrivacyBudget(eps)
        self.k = int(k)
        self.eps = float(eps)

    def _check_inputs(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        if xs.size and (xs.min() < 0 or xs.max() >= self.k):
            raise ValueError(f"inputs must lie in [0, {self.k})")
        return xs

    def randomize(self, x: int, rng: np.random.Generator):
        """One private message for the input x."""
        raise NotImplementedError

    def randomize_batch(self, xs: np.ndarray, rng: np.random.Generator):
        """Messages for a whole dataset; semantically n independent calls."""
        raise NotImplementedError

    def aggregate(self, messages) -> FrequencyVector:
        """Unbiased frequency estimate from a batch of messages."""
        raise NotImplementedError

    def enumerate_messages(self):
        """All possible messages, in the canonical order used by
        output_distribution.  Raises CapabilityError past the enum caps."""
        raise NotImplementedError

    def output_distribution(self, x: int) -> np.ndarray:
        """Exact message distribution for input x, aligned with
        enumerate_messages."""
        raise NotImplementedError

    @property
    def message_bits(self) -> int:
        raise NotImplementedError

    @property
    def message_space(self) -> str:
        raise NotImplementedError

    @property
    def descriptor(self) -> ProtocolDescriptor:
        return ProtocolDescriptor(self.name, self.k, self.eps, self.message_space, self.message_bits)


class KRandomizedResponse(LocalProtocol):
    """k-ary randomized response."""

    name = "krr"

    def __init__(self, k: int, eps: float):
        super().__init__(k, eps)
        w = math.exp(-self.eps)
        self.p_keep = 1.0 / (1.0 + (k - 1) * w)
        self.p_other = w / (1.0 + (k - 1) * w)

    def randomize(self, x: int, rng: np.random.Generator) -> int:
        return int(self.randomize_batch(np.array([x]), rng)[0])

    def randomize_batch(self, xs, rng) -> np.ndarray:
        xs = self._check_inputs(xs)
        keep = rng.random(xs.size) < self.p_keep
        others = rng.integers(0, self.k - 1, size=xs.size)
        others += others >= xs
        return np.where(keep, xs, others)

    def aggregate(self, messages) -> FrequencyVector:
        ys = np.asarray(messages, dtype=np.int64)
        if ys.size == 0:
            raise ValueError("cannot aggregate zero messages")
        freqs = np.bincount(ys, minlength=self.k) / ys.size
        return FrequencyVector((freqs - self.p_other) / (self.p_keep - self.p_other), debiased=True)

    def enumerate_messages(self):
        return list(range(self.k))

    def output_distribution(self, x: int) -> np.ndarray:
        probs = np.full(self.k, self.p_other)
        probs[x] = self.p_keep
        return probs

    @property
    def message_bits(self) -> int:
        return max(1, math.ceil(math.log2(self.k)))

    @property
    def message_space(self) -> str:
        return f"symbol in [0, {self.k})"


class Rappor(LocalProtocol):
    """One-hot encoding with independent bit flips.

    The flip probability 1 / (e^{eps/2} + 1) splits the budget evenly over
    the two bit positions where neighboring one-hot encodings differ, which
    is what makes the mechanism eps-private overall.
    """

    name = "rappor"

    def __init__(self, k: int, eps: float):
        super().__init__(k, eps)
        self.flip_prob = _inv_exp1p(self.eps / 2.0)
        # Debias q_hat = scale * ybar - offset, the inverse of
        # E[ybar_j] = flip + q_j (1 - 2 flip).
        self.scale = 1.0 / math.tanh(self.eps / 4.0)
        self.offset = _inv_expm1(self.eps / 2.0)

    def randomize(self, x: int, rng: np.random.Generator) -> np.ndarray:
        bits = (rng.random(self.k) < self.flip_prob).astype(np.uint8)
        bits[x] ^= 1
        return bits

    def randomize_batch(self, xs, rng) -> np.ndarray:
        xs = self._check_inputs(xs)
        bits = (rng.random((xs.size, self.k)) < self.flip_prob).astype(np.uint8)
        bits[np.arange(xs.size), xs] ^= 1
        return bits

    def aggregate(self, messages) -> FrequencyVector:
        bits = np.asarray(messages)
        if bits.ndim == 1:
            bits = bits[None, :]
        if bits.shape[0] == 0 or bits.shape[1] != self.k:
            raise ValueError(f"expected a nonempty (n, {self.k}) bit array, got {bits.shape}")
        ybar = bits.mean(axis=0, dtype=np.float64)
        return FrequencyVector(self.scale * ybar - self.offset, debiased=True)

    def enumerate_messages(self):
        if self.k > RAPPOR_ENUM_MAX_K:
            raise CapabilityError(
                f"2^{self.k} messages cannot be enumerated (cap k <= {RAPPOR_ENUM_MAX_K})"
            )
        idx = np.arange(1 << self.k, dtype=np.int64)
        return list(((idx[:, None] >> np.arange(self.k)) & 1).astype(np.uint8))

    def output_distribution(self, x: int) -> np.ndarray:
        messages = np.stack(self.enumerate_messages())
        onehot = np.zeros(self.k, dtype=np.uint8)
        onehot[x] = 1
        hamming = np.sum(messages != onehot, axis=1)
        return self.flip_prob**hamming * (1.0 - self.flip_prob) ** (self.k - hamming)

    @property
    def message_bits(self) -> int:
        return self.k

    @property
    def message_space(self) -> str:
        return f"{self.k}-bit vector"


class SubsetSelection(LocalProtocol):
    """Report a uniform-size subset, biased toward subsets holding the input.

    The message is a size-s subset of [0, k) drawn with probability
    proportional to e^eps when it contains the input and 1 otherwise, with
    s = ceil(k / (e^eps + 1)).  Sampling goes through an equivalent
    two-stage draw: include the input with the marginal probability
    s e^eps / (s e^eps + k - s), then fill up uniformly.
    """

    name = "ss"

    def __init__(self, k: int, eps: float, s: int | None = None):
        super().__init__(k, eps)
        if s is None:
            s = math.ceil(k * _inv_exp1p(eps))
        self.s = int(s)
        if not 1 <= self.s <= k - 1:
            raise ValueError(f"subset size s={self.s} must lie in [1, {k - 1}]")
        w = math.exp(-self.eps)
        self.p_include = self.s / (self.s + (self.k - self.s) * w)
        # Membership probabilities of any fixed symbol j in the reported set.
        self.p1 = self.p_include
        self.p0 = (
            self.p_include * (self.s - 1) + (1.0 - self.p_include) * self.s
        ) / (self.k - 1)

    def randomize(self, x: int, rng: np.random.Generator) -> np.ndarray:
        include = rng.random() < self.p_include
        take = self.s - 1 if include else self.s
        others = rng.choice(self.k - 1, size=take, replace=False)
        others += others >= x
        members = np.append(others, x) if include else others
        return np.sort(members.astype(np.int64))

    def randomize_batch(self, xs, rng) -> np.ndarray:
        xs = self._check_inputs(xs)
        include = rng.random(xs.size) < self.p_include
        # Uniform subsets as the s smallest of iid uniform keys; pinning the
        # input's key below (or above) every other key forces it in or out
        # without disturbing uniformity of the rest.
        keys = rng.random((xs.size, self.k))
        keys[np.arange(xs.size), xs] = np.where(include, -1.0, 2.0)
        members = np.argpartition(keys, self.s - 1, axis=1)[:, : self.s]
        return np.sort(members, axis=1).astype(np.int64)

    def aggregate(self, messages) -> FrequencyVector:
        members = np.asarray(messages, dtype=np.int64)
        if members.ndim == 1:
            members = members[None, :]
        if members.shape[0] == 0 or members.shape[1] != self.s:
            raise ValueError(f"expected a nonempty (n, {self.s}) member array, got {members.shape}")
        freqs = np.bincount(members.ravel(), minlength=self.k) / members.shape[0]
        return FrequencyVector((freqs - self.p0) / (self.p1 - self.p0), debiased=True)

    def enumerate_messages(self):
        import itertools

        if math.comb(self.k, self.s) > ENUM_MAX_MESSAGES:
            raise CapabilityError(
                f"C({self.k}, {self.s}) subsets exceed the enumeration cap {ENUM_MAX_MESSAGES}"
            )
        return [np.array(combo, dtype=np.int64) for combo in itertools.combinations(range(self.k), self.s)]

    def output_distribution(self, x: int) -> np.ndarray:
        with_x = self.p_include / math.comb(self.k - 1, self.s - 1)
        without_x = (1.0 - self.p_include) / math.comb(self.k - 1, self.s)
        probs = np.array(
            [with_x if x in set(m.tolist()) else without_x for m in self.enumerate_messages()]
        )
        return probs

    @property
    def message_bits(self) -> int:
        return self.s * max(1, math.ceil(math.log2(self.k)))

    @property
    def message_space(self) -> str:
        return f"size-{self.s} subset of [0, {self.k})"


class IntersectionFamilyProtocol(LocalProtocol):
    """Randomizer over a uniform set system.

    The message is a universe element drawn with probability proportional to
    e^eps inside S(x) and 1 outside.  Because member sets share size s and
    pairwise intersections share size c, the membership rate of S(x) among
    observed messages is an affine function of the frequency of x, and the
    aggregator just inverts that line:

        q_hat_x = alpha * (membership rate of S(x)) + beta.

    Inputs live in [0, k); when k is below the system capacity the remaining
    rows act as padding symbols that real users never send.
    ``aggregate`` estimates the k real symbols, ``aggregate_universe`` all
    ``capacity`` rows (padding estimates measure the noise floor).
    """

    def __init__(self, name: str, k: int, eps: float, system: SetSystem):
        super().__init__(k, eps)
        if k > system.capacity:
            raise ValueError(f"k={k} exceeds the system capacity {system.capacity}")
        self.name = name
        self.system = system
        w = math.exp(-self.eps)
        self.p_inside = system.s / (system.s + (system.m - system.s) * w)
        inv = _inv_expm1(self.eps)
        self.alpha = (system.s + system.m * inv) / (system.s - system.c)
        self.beta = -(system.c + system.s * inv) / (system.s - system.c)

    def randomize(self, x: int, rng: np.random.Generator) -> int:
        return int(self.randomize_batch(np.array([x]), rng)[0])

    def randomize_batch(self, xs, rng) -> np.ndarray:
        xs = self._check_inputs(xs)
        inside = rng.random(xs.size) < self.p_inside
        out = np.empty(xs.size, dtype=np.int64)
        out[inside] = self.system.sample_members(xs[inside], rng)
        out[~inside] = self.system.sample_complement(xs[~inside], rng)
        return out

    def _estimate(self, messages, rows: int) -> FrequencyVector:
        ys = np.asarray(messages, dtype=np.int64)
        if ys.size == 0:
            raise ValueError("cannot aggregate zero messages")
        hist = np.bincount(ys, minlength=self.system.m)
        rates = self.system.membership_counts(hist, rows) / ys.size
        return FrequencyVector(self.alpha * rates + self.beta, debiased=True)

    def aggregate(self, messages) -> FrequencyVector:
        return self._estimate(messages, self.k)

    def aggregate_universe(self, messages) -> FrequencyVector:
        return self._estimate(messages, self.system.capacity)

    def enumerate_messages(self):
        if self.system.m > ENUM_MAX_MESSAGES:
            raise CapabilityError(
                f"{self.system.m} messages exceed the enumeration cap {ENUM_MAX_MESSAGES}"
            )
        return list(range(self.system.m))

    def output_distribution(self, x: int) -> np.ndarray:
        sys = self.system
        probs = np.full(sys.m, (1.0 - self.p_inside) / (sys.m - sys.s))
        probs[sys.members(x)] = self.p_inside / sys.s
        return probs

    @property
    def message_bits(self) -> int:
        return max(1, math.ceil(math.log2(self.system.m)))

    @property
    def message_space(self) -> str:
        return f"universe element in [0, {self.system.m})"


def pgr_protocol(k: int, eps: float) -> IntersectionFamilyProtocol:
    """Projective-geometry response sized for k inputs at budget eps."""
    return IntersectionFamilyProtocol("pgr", k, eps, build_pgr_system(k, eps))


def hadamard_protocol(k: int, eps: float) -> IntersectionFamilyProtocol:
    """Hadamard response over the smallest Sylvester matrix fitting k."""
    return IntersectionFamilyProtocol("hr", k, eps, build_hadamard_system(k))


def base_protocol(name: str, k: int, eps: float) -> LocalProtocol:
    """Construct one of the five base protocols by CLI name."""
    factories = {
        "krr": KRandomizedResponse,
        "rappor": Rappor,
        "ss": SubsetSelection,
        "pgr": pgr_protocol,
        "hr": hadamard_protocol,
    }
    if name not in factories:
        raise ValueError(f"unknown protocol {name!r}, expected one of {sorted(factories)}")
    return factories[name](k, eps)


def output_matrix(protocol: LocalProtocol) -> np.ndarray:
    """Column-stochastic matrix of exact output probabilities.

    Column x is the message distribution for input x, rows ordered as in
    enumerate_messages.
    """
    n_messages = len(protocol.enumerate_messages())
    mat = np.empty((n_messages, protocol.k))
    for x in range(protocol.k):
        mat[:, x] = protocol.output_distribution(x)
    return mat


def max_privacy_ratio(protocol: LocalProtocol) -> float:
    """Largest output-probability ratio over all message/input pairs.

    For an eps-private protocol this never exceeds e^eps; measuring it from
    the exact output matrix is the audit used in the tests.
    """
    mat = output_matrix(protocol)
    if np.any(mat <= 0):
        raise ValueError("audit requires strictly positive output probabilities")
    return float(np.max(mat.max(axis=1) / mat.min(axis=1)))
