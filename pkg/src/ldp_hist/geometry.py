"""Set systems behind the intersection-family protocols.

Both constructions give every input x a member set S(x) of uniform size s
inside a finite universe of m messages, with every pairwise intersection of
equal size c.  Those three numbers are all the aggregator needs, and the
uniformity is what makes a single affine debias correct for every symbol.

Two families are provided:

* points of a projective space over a prime field, where S(x) is the set of
  points orthogonal to x (a hyperplane), and
* rows of a Sylvester-Hadamard matrix, where S(x) is the set of columns
  holding +1 in row x+1.
"""

from __future__ import annotations

import functools
import math
import warnings

import numpy as np

from ldp_hist.core import CapabilityError

# Enumeration / materialization guards.  Universes past these sizes would
# need streaming constructions rather than dense arrays.
MAX_POINTS = 2**26
MAX_MEMBER_ENTRIES = 2**28
MAX_UNIVERSE_BITS = 63


def n_projective_points(p: int, t: int) -> int:
    """Number of projective points of dimension t over the field F_p."""
    return (p**t - 1) // (p - 1)


def select_prime(eps: float) -> int:
    """Smallest prime p with e^eps + 1 <= p <= 2 (e^eps + 1).

    Bertrand's postulate guarantees one exists in that window, so the scan
    from ceil(e^eps + 1) always terminates inside it.
    """
    from sympy import isprime

    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    if eps > 700:
        raise CapabilityError(f"e^eps overflows for eps={eps}")
    lo = math.exp(eps) + 1.0
    p = max(2, math.ceil(lo))
    while not isprime(p):
        p += 1
    if p > 2 * lo:
        raise AssertionError(f"prime scan escaped the Bertrand window for eps={eps}")
    return p


def projective_space_points(p: int, t: int) -> np.ndarray:
    """Canonical representatives of the projective points, one per class.

    Returns:
        int64 array of shape (n_points, t).  Each row has first nonzero
        coordinate equal to 1; rows are in ascending lexicographic order.
    """
    if t < 2:
        raise ValueError(f"need t >= 2, got {t}")
    n_points = n_projective_points(p, t)
    if p**t >= 2**MAX_UNIVERSE_BITS:
        raise CapabilityError(f"p^t = {p}^{t} exceeds the {MAX_UNIVERSE_BITS}-bit range")
    if n_points > MAX_POINTS:
        raise CapabilityError(f"{n_points} projective points exceed the enumeration limit")
    groups = []
    for lead in reversed(range(t)):
        nsuf = t - lead - 1
        count = p**nsuf
        block = np.zeros((count, t), dtype=np.int64)
        block[:, lead] = 1
        idx = np.arange(count)
        for j in range(nsuf):
            block[:, lead + 1 + j] = (idx // p ** (nsuf - 1 - j)) % p
        groups.append(block)
    points = np.concatenate(groups, axis=0)
    assert points.shape[0] == n_points
    return points


class SetSystem:
    """Uniform set system: |S(x)| = s for all x, |S(x) & S(x')| = c for x != x'.

    Attributes:
        m: universe (message) size.
        capacity: number of distinct inputs the system supports.
        s: member set size.
        c: pairwise intersection size.
    """

    m: int
    capacity: int
    s: int
    c: int

    def members(self, x: int) -> np.ndarray:
        raise NotImplementedError

    def membership(self, xs, ys) -> np.ndarray:
        """Vectorized S-membership test: is ys[i] in S(xs[i])?"""
        raise NotImplementedError

    def membership_counts(self, hist: np.ndarray, rows: int) -> np.ndarray:
        """For x in [0, rows): how many observed messages fall in S(x).

        Args:
            hist: int64 histogram of messages over [0, m).
            rows: number of leading inputs to decode.
        """
        raise NotImplementedError

    def sample_members(self, xs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """One uniform draw from S(x) per entry of xs."""
        raise NotImplementedError

    def sample_complement(self, xs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """One uniform draw from the complement of S(x) per entry of xs."""
        xs = np.asarray(xs, dtype=np.int64)
        out = np.empty(xs.size, dtype=np.int64)
        todo = np.arange(xs.size)
        while todo.size:
            cand = rng.integers(0, self.m, size=todo.size)
            ok = ~self.membership(xs[todo], cand)
            out[todo[ok]] = cand[ok]
            todo = todo[~ok]
        return out


class ProjectiveGeometrySystem(SetSystem):
    """S(x) = points orthogonal to point x under the standard bilinear form."""

    def __init__(self, p: int, t: int):
        from sympy import isprime

        if not isprime(p):
            raise ValueError(f"p must be prime, got {p}")
        if t < 3:
            raise ValueError(f"need t >= 3 so pairwise intersections are nonempty, got {t}")
        self.p = p
        self.t = t
        self.points = projective_space_points(p, t)
        self.m = self.points.shape[0]
        self.capacity = self.m
        self.s = n_projective_points(p, t - 1)
        self.c = n_projective_points(p, t - 2)
        self._member_rows: np.ndarray | None = None

    def membership(self, xs, ys) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        dots = np.sum(self.points[xs] * self.points[ys], axis=-1)
        return dots % self.p == 0

    def members(self, x: int) -> np.ndarray:
        if self._member_rows is not None and x < self._member_rows.shape[0]:
            return self._member_rows[x]
        dots = self.points @ self.points[x]
        return np.nonzero(dots % self.p == 0)[0]

    def member_matrix(self, rows: int) -> np.ndarray:
        """Member lists for inputs [0, rows) as a (rows, s) sorted array."""
        if rows > self.capacity:
            raise ValueError(f"rows={rows} exceeds capacity {self.capacity}")
        if self._member_rows is None or self._member_rows.shape[0] < rows:
            if rows * self.s > MAX_MEMBER_ENTRIES:
                raise CapabilityError(
                    f"member matrix with {rows}x{self.s} entries exceeds the materialization limit"
                )
            # Exact blocked Gram computation: values stay below t*(p-1)^2,
            # which fits float64 integers whenever p^t fits 63 bits.
            pf = self.points.astype(np.float64)
            out = np.empty((rows, self.s), dtype=np.int64)
            block = max(1, (2**22) // self.m)
            for lo in range(0, rows, block):
                hi = min(lo + block, rows)
                gram = pf[lo:hi] @ pf.T
                gram %= self.p
                ridx, cidx = np.nonzero(gram == 0)
                assert cidx.size == (hi - lo) * self.s, "hyperplane sizes must equal s"
                out[lo:hi] = cidx.reshape(hi - lo, self.s)
            self._member_rows = out
        return self._member_rows[:rows]

    def membership_counts(self, hist: np.ndarray, rows: int) -> np.ndarray:
        mm = self.member_matrix(rows)
        return hist[mm].sum(axis=1)

    def sample_members(self, xs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        mm = self.member_matrix(int(xs.max()) + 1 if xs.size else 1)
        picks = rng.integers(0, self.s, size=xs.size)
        return mm[xs, picks]


def fwht(vec: np.ndarray) -> np.ndarray:
    """Walsh-Hadamard transform with the Sylvester sign convention.

    Returns H @ vec for H[i][j] = (-1)^popcount(i & j), computed in int64
    with the usual butterfly recursion, so the result is exact for integer
    input of moderate magnitude.
    """
    n = vec.size
    if n & (n - 1) or n == 0:
        raise ValueError(f"length must be a power of two, got {n}")
    out = vec.astype(np.int64)
    h = 1
    while h < n:
        out = out.reshape(n // (2 * h), 2, h)
        top = out[:, 0, :] + out[:, 1, :]
        bot = out[:, 0, :] - out[:, 1, :]
        out = np.stack([top, bot], axis=1).reshape(n)
        h *= 2
    return out


class HadamardSystem(SetSystem):
    """S(x) = columns where row x+1 of the Sylvester matrix holds +1.

    Row 0 is all ones and is excluded, hence capacity K - 1 for a K x K
    matrix.  All such rows have K/2 entries +1 and pairwise agreement K/4.
    """

    def __init__(self, k: int):
        if k < 2:
            raise ValueError(f"need k >= 2, got {k}")
        # Smallest power of two >= k + 1, but at least 4 so that c >= 1.
        kk = 1 << max(2, k.bit_length())
        if kk > MAX_POINTS:
            raise CapabilityError(f"Hadamard order {kk} exceeds the enumeration limit")
        self.order = kk
        self.m = kk
        self.capacity = kk - 1
        self.s = kk // 2
        self.c = kk // 4

    @staticmethod
    def _parity(values: np.ndarray) -> np.ndarray:
        return np.bitwise_count(values.astype(np.uint64)).astype(np.int64) & 1

    def membership(self, xs, ys) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        return self._parity((xs + 1) & ys) == 0

    def members(self, x: int) -> np.ndarray:
        ys = np.arange(self.m, dtype=np.int64)
        return np.nonzero(self._parity((x + 1) & ys) == 0)[0]

    def membership_counts(self, hist: np.ndarray, rows: int) -> np.ndarray:
        if rows > self.capacity:
            raise ValueError(f"rows={rows} exceeds capacity {self.capacity}")
        transform = fwht(hist)
        total = int(hist.sum())
        return (total + transform[1 : rows + 1]) // 2

    def sample_members(self, xs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        rows = np.asarray(xs, dtype=np.int64) + 1
        ys = rng.integers(0, self.m, size=rows.size)
        odd = self._parity(rows & ys) == 1
        # XOR with the lowest set bit of the row index flips the parity and
        # maps the odd half bijectively onto the even half, so the result
        # stays uniform over S(x).
        return np.where(odd, ys ^ (rows & -rows), ys)

    def sample_complement(self, xs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        rows = np.asarray(xs, dtype=np.int64) + 1
        ys = rng.integers(0, self.m, size=rows.size)
        even = self._parity(rows & ys) == 0
        return np.where(even, ys ^ (rows & -rows), ys)


@functools.lru_cache(maxsize=8)
def build_projective_system(p: int, t: int) -> ProjectiveGeometrySystem:
    """Projective system for an explicit prime p and dimension t >= 3."""
    return ProjectiveGeometrySystem(p, t)


def build_pgr_system(k_target: int, eps: float) -> ProjectiveGeometrySystem:
    """Smallest projective system fitting k_target inputs at budget eps.

    The prime tracks e^eps (so the member sets are large enough to be hit
    often) and t >= 3 is the smallest dimension whose point count reaches
    k_target.  The extra points beyond k_target act as padding symbols with
    true frequency zero.
    """
    if k_target < 2:
        raise ValueError(f"need k_target >= 2, got {k_target}")
    p = select_prime(eps)
    t = 3
    while n_projective_points(p, t) < k_target:
        t += 1
        if p**t >= 2**MAX_UNIVERSE_BITS:
            raise CapabilityError(
                f"p^t = {p}^{t} exceeds the {MAX_UNIVERSE_BITS}-bit range for k_target={k_target}"
            )
    return build_projective_system(p, t)


def build_hadamard_system(k: int) -> HadamardSystem:
    """Smallest Sylvester system with capacity >= k (order >= k + 1)."""
    return HadamardSystem(k)


def alpha_bound_check(system: ProjectiveGeometrySystem, eps: float) -> float:
    """Debias slope alpha of a projective system, with its a-priori cap.

    When the prime sits in the window [e^eps + 1, 2 (e^eps + 1)] the slope
    is guaranteed to stay below 2 + (2 + p) / (e^eps - 1); outside the
    window the guarantee does not apply and only a warning is issued.

    Returns:
        alpha = ((e^eps - 1) s + m) / ((e^eps - 1) (s - c)).
    """
    if not isinstance(system, ProjectiveGeometrySystem):
        raise ValueError("the slope cap applies to projective systems only")
    em1 = math.expm1(eps)
    alpha = (system.s + system.m / em1) / (system.s - system.c)
    lo = math.exp(eps) + 1.0
    if not lo <= system.p <= 2 * lo:
        warnings.warn(
            f"p={system.p} is outside the window [{lo:.3f}, {2 * lo:.3f}] for eps={eps}; "
            "the slope cap is not guaranteed",
            stacklevel=2,
        )
        return alpha
    cap = 2.0 + (2.0 + system.p) / em1
    if alpha > cap:
        raise AssertionError(f"alpha={alpha} exceeds its cap {cap}; system is inconsistent")
    return alpha
