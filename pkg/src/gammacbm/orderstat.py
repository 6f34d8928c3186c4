"""Monitoring a fleet of identical components through order statistics.

``count`` i.i.d. component levels share one gamma law (the weighted
marginal, scale ``weight * spec.scale``).  The monitor trips when at least
``required`` of them exceed the threshold, the usual engineering reading of
an r-out-of-n deterioration rule; binomial tail sums over the common
marginal CDF give both the order-statistic CDF and the hitting-time law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .degradation import GammaProcessSpec
from .errors import DomainError
from .special import gamma_cdf


@dataclass(frozen=True)
class OrderStatMonitor:
    """r-out-of-n monitor over i.i.d. weighted gamma components."""

    count: int
    required: int
    spec: GammaProcessSpec
    weight: float
    threshold: float

    def __post_init__(self):
        if self.count < 1:
            raise DomainError(f"count must be at least 1, got {self.count}")
        if not 1 <= self.required <= self.count:
            raise DomainError(
                f"required must lie in [1, {self.count}], got {self.required}"
            )
        if not self.weight > 0.0:
            raise DomainError(f"weight must be positive, got {self.weight}")
        if not self.threshold > 0.0:
            raise DomainError(f"threshold must be positive, got {self.threshold}")

    def marginal_cdf(self, y: float, t: float) -> float:
        """CDF of one weighted component level at time t."""
        if not t > 0.0:
            raise DomainError(f"t must be positive, got {t}")
        return gamma_cdf(y, self.spec.shape_at(t), self.weight * self.spec.scale)


def _binomial_tail(p: float, n: int, r: int) -> float:
    """P(at least r of n independent events), each with probability p."""
    p = min(max(p, 0.0), 1.0)
    total = 0.0
    for k in range(r, n + 1):
        total += math.comb(n, k) * p**k * (1.0 - p) ** (n - k)
    return min(max(total, 0.0), 1.0)


def order_stat_cdf(mon: OrderStatMonitor, y: float, t: float) -> float:
    """CDF of the required-th smallest component level at time t.

    At least ``required`` of the ``count`` components must sit at or below
    ``y``.
    """
    if not y > 0.0:
        raise DomainError(f"y must be positive, got {y}")
    return _binomial_tail(mon.marginal_cdf(y, t), mon.count, mon.required)


def r_out_of_n_hitting_cdf(mon: OrderStatMonitor, t: float) -> float:
    """CDF of the first time at least ``required`` components exceed the threshold.

    Components grow monotonically, so this equals the probability that at
    least ``required`` exceed the threshold at time t; non-decreasing in t.
    """
    exceed = 1.0 - mon.marginal_cdf(mon.threshold, t)
    return _binomial_tail(exceed, mon.count, mon.required)
