"""Distributional statistics of one document's score samples.

Quantiles use the left-continuous inverse of the empirical CDF (an order
statistic, no interpolation); CVaR is the mean of the samples beyond it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError

DEFAULT_ENTROPY_BINS = 16


class Direction(str, Enum):
    OPTIMISTIC = "optimistic"
    PESSIMISTIC = "pessimistic"
    MEAN = "mean"

    @classmethod
    def parse(cls, value: "str | Direction") -> "Direction":
        if isinstance(value, Direction):
            return value
        aliases = {"opt": cls.OPTIMISTIC, "pess": cls.PESSIMISTIC, "+": cls.OPTIMISTIC, "-": cls.PESSIMISTIC}
        try:
            return aliases.get(value) or cls(value)
        except ValueError:
            raise DomainError(f"unknown direction {value!r}") from None


@dataclass(frozen=True)
class DistStats:
    mean: float
    variance: float
    skew: float
    entropy: float
    n: int

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


def _as_samples(samples) -> np.ndarray:
    s = np.asarray(samples, dtype=np.float64).reshape(-1)
    if s.size == 0:
        raise DomainError("empty sample list")
    return s


def moments(samples) -> DistStats:
    """Mean, unbiased variance and adjusted Fisher-Pearson skew (G1).

    ``entropy`` is left at 0; use :func:`describe` for the full record.
    Constant samples (and n < 2 / n < 3) get variance / skew 0.
    """
    s = _as_samples(samples)
    n = s.size
    mean = float(s.mean())
    if n < 2 or s.min() == s.max():
        return DistStats(mean, 0.0, 0.0, 0.0, n)
    dev = s - mean
    m2 = float(np.mean(dev**2))
    variance = m2 * n / (n - 1)
    skew = 0.0
    # Rounding noise around a near-constant sample must not produce O(1) skew.
    if n >= 3 and m2 > (1e-12 * max(1.0, abs(mean))) ** 2:
        m3 = float(np.mean(dev**3))
        g1 = m3 / m2**1.5
        skew = g1 * math.sqrt(n * (n - 1)) / (n - 2)
    return DistStats(mean, variance, skew, 0.0, n)


def entropy(samples, bins: int = DEFAULT_ENTROPY_BINS) -> float:
    """Shannon entropy (nats) of an equal-width histogram over [min, max]."""
    if bins < 1:
        raise DomainError(f"bins must be >= 1, got {bins}")
    s = _as_samples(samples)
    lo, hi = float(s.min()), float(s.max())
    if hi - lo < 1e-12:
        return 0.0
    counts, _ = np.histogram(s, bins=bins, range=(lo, hi))
    p = counts[counts > 0] / s.size
    return float(max(0.0, -np.sum(p * np.log(p))))


def describe(samples, bins: int = DEFAULT_ENTROPY_BINS) -> DistStats:
    m = moments(samples)
    return DistStats(m.mean, m.variance, m.skew, entropy(samples, bins), m.n)


def _check_level(alpha: float, upper_inclusive: bool) -> None:
    ok = 0.0 < alpha <= 1.0 if upper_inclusive else 0.0 < alpha < 1.0
    if not ok:
        bound = "(0, 1]" if upper_inclusive else "(0, 1)"
        raise DomainError(f"alpha must lie in {bound}, got {alpha}")


def _order_index(alpha: float, n: int) -> int:
    """Smallest k in 1..n with k/n >= alpha."""
    k = max(1, min(n, math.ceil(alpha * n)))
    while k > 1 and (k - 1) / n >= alpha:
        k -= 1
    while k < n and k / n < alpha:
        k += 1
    return k


def ecdf_quantile(samples, alpha: float) -> float:
    _check_level(alpha, upper_inclusive=True)
    s = np.sort(_as_samples(samples))
    return float(s[_order_index(alpha, s.size) - 1])


def cvar(samples, alpha: float, direction: "str | Direction" = Direction.OPTIMISTIC) -> float:
    """Tail mean of a sample set.

    optimistic: mean of samples >= F^-1(alpha) (upper tail).
    pessimistic: mean of samples <= F^-1(1 - alpha) (lower tail), so the
    same alpha selects an equally extreme tail in both directions.
    mean: plain sample mean; alpha is ignored.
    """
    direction = Direction.parse(direction)
    s = _as_samples(samples)
    if direction is Direction.MEAN:
        return float(s.mean())
    _check_level(alpha, upper_inclusive=False)
    if direction is Direction.OPTIMISTIC:
        tail = s[s >= ecdf_quantile(s, alpha)]
    else:
        tail = s[s <= ecdf_quantile(s, 1.0 - alpha)]
    return float(tail.mean())
