"""Conditional probability model of an imperfect number-resolving detector.

The detector is an ideal photon counter preceded by a loss channel and
subject to Poissonian dark counts: each of the n incident photons survives
independently with probability 1 - p_loss, and an independent Poisson(lam)
number of dark counts is added to the survivors. The measured count m is
therefore distributed as Binomial(n, 1 - p_loss) + Poisson(lam), and

    P(m|n) = sum_d  pois(d; lam) * C(n, m-d) * (1-p_loss)^(m-d) * p_loss^(n-m+d)

with the binomial coefficient taken as zero outside 0 <= m-d <= n, which
makes the sum over d finite and exact. Every term is evaluated in the log
domain via log-gamma so large factorials neither overflow nor round to
spurious zeros, and 0**0 is treated as 1 so the p_loss = 0 and p_loss = 1
edge cases come out exact.

All functions here are pure; built matrices are immutable and safe to share
across threads.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "DetectorParams",
    "ConditionalMatrix",
    "poisson_pmf",
    "conditional_prob",
    "build_matrix",
]


@dataclass(frozen=True)
class DetectorParams:
    """Physical parameters of the lossy, dark-count-prone detector.

    Attributes:
        p_loss: per-photon loss probability, in [0, 1].
        lam: mean number of dark counts per measurement window. Treated as
            the per-shot mean; converting a physical rate times a window
            duration into this number is the caller's job.
        tail_epsilon: maximum probability mass allowed to fall above the
            truncated measured-count range of a built matrix, in (0, 1).
    """

    p_loss: float
    lam: float
    tail_epsilon: float = 1e-10

    def __post_init__(self) -> None:
        if not (0.0 <= self.p_loss <= 1.0):
            raise ValueError(f"p_loss must be in [0, 1], got {self.p_loss!r}")
        if not (self.lam >= 0.0 and math.isfinite(self.lam)):
            raise ValueError(f"lam must be finite and >= 0, got {self.lam!r}")
        if not (0.0 < self.tail_epsilon < 1.0):
            raise ValueError(
                f"tail_epsilon must be in (0, 1), got {self.tail_epsilon!r}"
            )


@dataclass(frozen=True)
class ConditionalMatrix:
    """Finite matrix of conditional probabilities P(m|n).

    entries[m, n] is the probability of measuring m counts given n incident
    photons, for n in 0..n_max and m in 0..m_max. Matrices produced by
    build_matrix retain at least 1 - tail_epsilon of every column's mass;
    the remainder lies above m_max.
    """

    n_max: int
    m_max: int
    entries: np.ndarray

    def __post_init__(self) -> None:
        if self.n_max < 0 or self.m_max < 0:
            raise ValueError("n_max and m_max must be >= 0")
        e = np.array(self.entries, dtype=float)
        if e.shape != (self.m_max + 1, self.n_max + 1):
            raise ValueError(
                f"entries shape {e.shape} does not match "
                f"(m_max+1, n_max+1) = {(self.m_max + 1, self.n_max + 1)}"
            )
        if not np.all(np.isfinite(e)):
            raise ValueError("entries must be finite")
        if e.min() < 0.0 or e.max() > 1.0:
            raise ValueError("entries must be probabilities in [0, 1]")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    def column(self, n: int) -> np.ndarray:
        """Distribution of measured counts for n incident photons."""
        return self.entries[:, n]


def poisson_pmf(lam: float, d: int) -> float:
    """Probability of d dark counts under a Poisson law with mean lam.

    Evaluated as exp(-lam + d*log(lam) - lgamma(d+1)), so rates up to 1e3
    and counts up to 1e4 stay inside float range until the final
    exponentiation.
    """
    d = _check_count(d, "d")
    if not (lam >= 0.0 and math.isfinite(lam)):
        raise ValueError(f"lam must be finite and >= 0, got {lam!r}")
    if lam == 0.0:
        return 1.0 if d == 0 else 0.0
    return math.exp(-lam + d * math.log(lam) - math.lgamma(d + 1))


def conditional_prob(params: DetectorParams, m: int, n: int) -> float:
    """P(m|n): probability of measuring m counts given n incident photons.

    Exact finite sum over the number of dark counts d from max(0, m-n)
    to m; equivalently over the number of surviving photons s = m - d.
    """
    m = _check_count(m, "m")
    n = _check_count(n, "n")
    binom = _survivor_pmf(n, params.p_loss)
    pois = np.array([poisson_pmf(params.lam, m - s) for s in range(min(n, m) + 1)])
    return _entry(m, binom, pois_by_survivors=pois)


def build_matrix(params: DetectorParams, n_max: int) -> ConditionalMatrix:
    """Construct the P(m|n) matrix for incident numbers 0..n_max.

    The measured range is truncated at m_max = n_max + q, where q is the
    smallest integer whose Poisson(lam) tail mass beyond it is at most
    tail_epsilon; every column then retains at least 1 - tail_epsilon of
    its mass. Entries are bit-identical to conditional_prob.
    """
    n_max = _check_count(n_max, "n_max")
    m_max = n_max + _poisson_tail_quantile(params.lam, params.tail_epsilon)
    pois = np.array([poisson_pmf(params.lam, d) for d in range(m_max + 1)])
    entries = np.zeros((m_max + 1, n_max + 1))
    for n in range(n_max + 1):
        binom = _survivor_pmf(n, params.p_loss)
        for m in range(m_max + 1):
            s_top = min(n, m)
            entries[m, n] = _entry(m, binom[: s_top + 1], pois[m - s_top : m + 1][::-1])
    return ConditionalMatrix(n_max=n_max, m_max=m_max, entries=entries)


def _check_count(value, name: str) -> int:
    try:
        value = operator.index(value)
    except TypeError:
        raise ValueError(f"{name} must be an integer, got {value!r}") from None
    if value < 0:
        raise ValueError(f"{name} must be >= 0, got {value}")
    return value


def _binomial_pmf(k: int, n: int, q: float) -> float:
    """C(n,k) q^k (1-q)^(n-k) with the 0**0 = 1 convention, 0 outside 0..n."""
    if k < 0 or k > n:
        return 0.0
    if q == 0.0:
        return 1.0 if k == 0 else 0.0
    if q == 1.0:
        return 1.0 if k == n else 0.0
    log_comb = math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
    return math.exp(log_comb + k * math.log(q) + (n - k) * math.log1p(-q))


def _survivor_pmf(n: int, p_loss: float) -> np.ndarray:
    """Distribution of the number of photons (0..n) that survive the loss."""
    return np.array([_binomial_pmf(s, n, 1.0 - p_loss) for s in range(n + 1)])


def _entry(m: int, binom: np.ndarray, pois_by_survivors: np.ndarray) -> float:
    # pois_by_survivors[s] = pois(m - s); fsum keeps the result correctly
    # rounded and independent of term count.
    s_top = min(len(binom), len(pois_by_survivors)) - 1
    return math.fsum(binom[s] * pois_by_survivors[s] for s in range(s_top + 1))


def _poisson_tail_quantile(lam: float, epsilon: float) -> int:
    """Smallest q with P(D > q) <= epsilon for D ~ Poisson(lam)."""
    if lam == 0.0:
        return 0
    q = max(0, int(lam) - 1)
    while _poisson_tail(lam, q) > epsilon:
        q += 1
    while q > 0 and _poisson_tail(lam, q - 1) <= epsilon:
        q -= 1
    return q


def _poisson_tail(lam: float, q: int) -> float:
    # P(D > q) equals the lower regularized incomplete gamma P(q+1, lam),
    # which stays accurate far below float cancellation limits.
    return float(special.gammainc(q + 1, lam))
