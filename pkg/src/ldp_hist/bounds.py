"""Closed-form expected-maximum-error curves for the protocols.

Each curve predicts the expected l_infinity estimation error at privacy
budget eps, alphabet size k and sample size n.  Curves whose leading
constant is pinned down are marked ``constant_known``; the others take a
caller-chosen multiplier and exist for plotting overlays, not assertions.

The upper bounds for the one-hot bit-flip protocol come in two flavors: a
direct sub-Gaussian maximum bound, and a sharper local Glivenko-Cantelli
style bound whose variance proxy is the Kearns-Saul inequality.  Both are
decreasing in eps; the second wins once eps is large because its leading
term scales with the flip probability itself rather than its square root.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable


def _check_ekn(eps: float, k: int, n: int) -> None:
    if eps <= 0 or not math.isfinite(eps):
        raise ValueError(f"eps must be finite and > 0, got {eps}")
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")


def rappor_subgaussian_bound(eps: float, k: int, n: int) -> float:
    """Expected-maximum bound for the one-hot bit-flip protocol.

    sqrt(2 (e^{eps/2} + 1) ln k / (n (e^{eps/2} - 1) eps)); the constant
    is explicit.
    """
    _check_ekn(eps, k, n)
    e_half = math.exp(eps / 2.0)
    return math.sqrt(2.0 * (e_half + 1.0) * math.log(k) / (n * (e_half - 1.0) * eps))


def kearns_saul_sigma2(p: float) -> float:
    """Optimal sub-Gaussian variance proxy of a Bernoulli(p) variable.

    (2p - 1) / (2 ln(p / (1 - p))), extended by continuity to 1/4 at
    p = 1/2 and 0 at the endpoints.  Symmetric in p <-> 1 - p by
    construction.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    m = min(p, 1.0 - p)
    if m == 0.0:
        return 0.0
    if abs(2.0 * m - 1.0) < 1e-8:
        return 0.25
    return (1.0 - 2.0 * m) / (2.0 * math.log((1.0 - m) / m))


def rappor_local_gc_bound(eps: float, k: int, n: int, constant: float = 1.0) -> float:
    """Localized bound for the one-hot bit-flip protocol, constant unknown.

    constant * ( sqrt(ln(k+1)/n * (e^{eps/2}+1)/(e^{eps/2}-1)^2)
               + (ln n / n) * (e^{eps/2}+1)/(e^{eps/2}-1)
                 * ln(k+1)/ln(e^{eps/2}+1) ).
    """
    _check_ekn(eps, k, n)
    if eps < 1.0:
        warnings.warn(f"bound derived for eps >= 1, got {eps}", stacklevel=2)
    if n < 21:
        warnings.warn(f"bound needs n >= 21, got {n}", stacklevel=2)
    e_half = math.exp(eps / 2.0)
    lk = math.log(k + 1)
    term1 = math.sqrt(lk / n * (e_half + 1.0) / (e_half - 1.0) ** 2)
    term2 = math.log(n) / n * (e_half + 1.0) / (e_half - 1.0) * lk / math.log(e_half + 1.0)
    return constant * (term1 + term2)


def pgr_upper_bound(eps: float, k: int, n: int) -> float:
    """Expected-maximum bound for projective-geometry response.

    sqrt(16 (2 e^eps + 1)^2 ln(k+1) / (e^eps (e^eps - 1)^2 n))
    + 4 (2 e^eps + 1) ln(k+1) ln(n) / ((e^eps - 1) eps n); explicit
    constant.
    """
    _check_ekn(eps, k, n)
    if eps < 1.0:
        warnings.warn(f"bound derived for eps >= 1, got {eps}", stacklevel=2)
    e_eps = math.exp(eps)
    lk = math.log(k + 1)
    term1 = math.sqrt(16.0 * (2.0 * e_eps + 1.0) ** 2 * lk / (e_eps * (e_eps - 1.0) ** 2 * n))
    term2 = 4.0 * (2.0 * e_eps + 1.0) * lk * math.log(n) / ((e_eps - 1.0) * eps * n)
    return term1 + term2


def lower_bound(eps: float, k: int, n: int) -> float:
    """Minimax lower bound on expected l_infinity error, any protocol.

    The best of three regimes: two sampling-style terms with prefactor
    1/(8 sqrt(2)) and a 1/(n eps) term.  Needs k > 4 so ln(k/4) > 0.
    """
    _check_ekn(eps, k, n)
    if k <= 4:
        raise ValueError(f"the lower bound needs k > 4, got {k}")
    lk = math.log(k / 4.0)
    pref = 1.0 / (8.0 * math.sqrt(2.0))
    e_eps = math.exp(eps)
    t1 = pref * math.sqrt(lk / (n * (e_eps - 1.0) ** 2))
    t2 = pref * math.sqrt(lk / (n * e_eps))
    t3 = lk / (8.0 * n * eps)
    return max(t1, t2, t3)


def sampling_error(norm: str, k: int, n: int) -> float:
    """Order of the no-privacy sampling error, constant unknown.

    sqrt(k/n) for l1; 1/sqrt(n) for l2 and linf.
    """
    if k < 2 or n < 1:
        raise ValueError(f"need k >= 2 and n >= 1, got k={k}, n={n}")
    if norm == "l1":
        return math.sqrt(k / n)
    if norm in ("l2", "linf"):
        return 1.0 / math.sqrt(n)
    raise ValueError(f"unknown norm {norm!r}")


@dataclass(frozen=True)
class BoundCurve:
    """A named error curve over (eps, k, n) with constant metadata."""

    name: str
    evaluate: Callable[[float, int, int], float]
    constant_known: bool
    constant: float = 1.0


def curve(name: str, constant: float = 1.0) -> BoundCurve:
    """Registry lookup used by the CLI; unknown-constant curves scale by
    ``constant``."""
    if name == "rappor_subgaussian":
        return BoundCurve(name, rappor_subgaussian_bound, constant_known=True)
    if name == "rappor_local_gc":
        return BoundCurve(
            name,
            lambda e, k, n: rappor_local_gc_bound(e, k, n, constant=constant),
            constant_known=False,
            constant=constant,
        )
    if name == "pgr_upper":
        return BoundCurve(name, pgr_upper_bound, constant_known=True)
    if name == "lower":
        return BoundCurve(name, lower_bound, constant_known=True)
    if name.startswith("sampling_"):
        norm = name.removeprefix("sampling_")
        return BoundCurve(
            name,
            lambda e, k, n: constant * sampling_error(norm, k, n),
            constant_known=False,
            constant=constant,
        )
    raise ValueError(f"unknown curve {name!r}, expected one of {CURVE_NAMES}")


CURVE_NAMES = (
    "rappor_subgaussian",
    "rappor_local_gc",
    "pgr_upper",
    "lower",
    "sampling_l1",
    "sampling_l2",
    "sampling_linf",
)
