"""Privacy amplification by shuffling, in closed form.

Pure calculators for the standard amplification bound of Feldman, McMillan
and Talwar (FOCS 2021): shuffling the reports of n users of an eps_local
randomizer yields a much smaller central (eps, delta) guarantee.  Both
directions are provided: the amplified budget for a given local one, and a
sufficient local budget for a desired central one.  No shuffling is
simulated here; the harness's aggregators are symmetric in their messages,
so a permutation would not change any estimate anyway.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ldp_hist.core import OutOfRegimeError
from ldp_hist.geometry import MAX_UNIVERSE_BITS, n_projective_points, select_prime


def _check_common(delta: float, n: int) -> None:
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must be in (0, 1], got {delta}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")


def amplified_epsilon(eps_local: float, delta: float, n: int) -> float:
    """Central epsilon after shuffling n reports of an eps_local randomizer.

    Valid for eps_local <= ln(n / (16 ln(2/delta))); outside that regime an
    OutOfRegimeError carries the largest admissible eps_local.
    """
    _check_common(delta, n)
    if eps_local <= 0:
        raise ValueError(f"eps_local must be > 0, got {eps_local}")
    ratio = n / (16.0 * math.log(2.0 / delta))
    max_local = math.log(ratio) if ratio > 0 else -math.inf
    if eps_local > max_local:
        raise OutOfRegimeError(
            f"eps_local={eps_local} exceeds the amplification regime bound {max_local}",
            max_eps_local=max_local,
        )
    e_local = math.exp(eps_local)
    shrink = math.tanh(eps_local / 2.0)  # (e^x - 1) / (e^x + 1)
    spread = math.sqrt(e_local * math.log(4.0 / delta) / n) + e_local / n
    return math.log1p(8.0 * shrink * spread)


def local_epsilon_for(eps_central: float, delta: float, n: int) -> float:
    """A local budget whose shuffled guarantee is at most (eps_central, delta).

    Valid for eps_central in (0, 1] with eps_central > 16 sqrt(ln(4/delta)/n);
    the returned value is ln(eps^2 n / (256 ln(4/delta))), always positive in
    that regime.
    """
    _check_common(delta, n)
    if not 0.0 < eps_central <= 1.0:
        raise ValueError(f"eps_central must be in (0, 1], got {eps_central}")
    log4d = math.log(4.0 / delta)
    floor_eps = 16.0 * math.sqrt(log4d / n)
    if eps_central <= floor_eps:
        raise OutOfRegimeError(
            f"eps_central={eps_central} needs more users: the floor at n={n} is {floor_eps}",
            min_eps_central=floor_eps,
            min_n=math.ceil(256.0 * log4d / eps_central**2) + 1,
        )
    return math.log(eps_central**2 * n / (256.0 * log4d))


@dataclass(frozen=True)
class ShuffledPgrConfig:
    """Parameters for running projective-geometry response under a shuffler.

    ``predicted_error`` is the theory curve sqrt(ln k * ln(1/delta)) / (n
    eps) with an unknown leading constant (reported as ``constant``); it is
    a plotting overlay, never an assertion target.
    """

    eps_central: float
    delta: float
    n: int
    k: int
    eps_local: float
    prime: int
    dimension: int
    k_padded: int
    set_size: int
    predicted_error: float
    constant: float = 1.0
    constant_known: bool = False

    def build_system(self):
        from ldp_hist.geometry import build_projective_system

        return build_projective_system(self.prime, self.dimension)


def shuffled_pgr_config(eps_central: float, delta: float, n: int, k: int) -> ShuffledPgrConfig:
    """Sizes projective-geometry response for a shuffled deployment.

    Requires the sample-size regime n >= (500 / eps^2) ln(4/delta); the
    local budget then comes from local_epsilon_for and the projective
    parameters from the usual prime selection at that budget.
    """
    _check_common(delta, n)
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1) to predict error, got {delta}")
    if not 0.0 < eps_central <= 1.0:
        raise ValueError(f"eps_central must be in (0, 1], got {eps_central}")
    min_n = 500.0 / eps_central**2 * math.log(4.0 / delta)
    if n < min_n:
        raise OutOfRegimeError(
            f"n={n} is below the regime floor {min_n:.1f} for eps={eps_central}, delta={delta}",
            min_n=math.ceil(min_n),
        )
    eps_local = local_epsilon_for(eps_central, delta, n)
    p = select_prime(eps_local)
    t = 3
    while n_projective_points(p, t) < k:
        t += 1
        if p**t >= 2**MAX_UNIVERSE_BITS:
            raise OutOfRegimeError(f"p^t = {p}^{t} exceeds the representable range", max_bits=MAX_UNIVERSE_BITS)
    predicted = math.sqrt(math.log(k) * math.log(1.0 / delta)) / (n * eps_central)
    return ShuffledPgrConfig(
        eps_central=eps_central,
        delta=delta,
        n=n,
        k=k,
        eps_local=eps_local,
        prime=p,
        dimension=t,
        k_padded=n_projective_points(p, t),
        set_size=n_projective_points(p, t - 1),
        predicted_error=predicted,
    )
