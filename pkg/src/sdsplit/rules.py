"""Demand splitting policies.

Two families are supported:

* ``lossless``: split a demand into its minimum-size coalescing partition for
  ``k_bar`` vehicles, leaving demands at or below ``q * Q`` whole.
* ``denomination``: the currency-style rules (20/10/5/1 and 25/10/5/1 percent
  of capacity) used as a baseline.

Thresholds use exact rational arithmetic; ``q`` is stored as a ``Fraction``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Union

from .partitions import Partition, mscp

if TYPE_CHECKING:
    from .instance import VrpInstance

Rational = Union[int, float, str, Fraction]

DENOM_20 = (Fraction(20, 100), Fraction(10, 100), Fraction(5, 100), Fraction(1, 100))
DENOM_25 = (Fraction(25, 100), Fraction(10, 100), Fraction(5, 100), Fraction(1, 100))

# external solvers read demands as 32-bit signed integers
DEMAND_LIMIT = 2**31 - 1


def as_fraction(value: Rational) -> Fraction:
    """Exact rational from user input; floats go through ``str`` so 0.4 becomes 2/5."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


@dataclass(frozen=True)
class SplitPolicy:
    kind: str = "lossless"
    k_bar: int = 2
    q: Fraction = Fraction(0)
    denominations: tuple[Fraction, ...] = DENOM_20

    def __post_init__(self):
        object.__setattr__(self, "q", as_fraction(self.q))
        object.__setattr__(
            self, "denominations", tuple(as_fraction(f) for f in self.denominations)
        )
        if self.kind not in ("lossless", "denomination"):
            raise ValueError(f"unknown split policy kind {self.kind!r}")
        if self.k_bar < 1:
            raise ValueError(f"k_bar must be >= 1, got {self.k_bar}")
        if not 0 <= self.q <= 1:
            raise ValueError(f"q must lie in [0, 1], got {self.q}")
        fr = self.denominations
        if not fr or any(not 0 < f <= 1 for f in fr) or any(a <= b for a, b in zip(fr, fr[1:])):
            raise ValueError(f"denominations must be strictly decreasing in (0, 1], got {fr}")

    @classmethod
    def from_rule(cls, rule: str, k_bar: int = 2, q: Rational = 0) -> "SplitPolicy":
        """Build a policy from a CLI rule name: ``lossless``, ``denom20`` or ``denom25``."""
        if rule == "lossless":
            return cls("lossless", k_bar, as_fraction(q))
        if rule == "denom20":
            return cls("denomination", k_bar, as_fraction(q), DENOM_20)
        if rule == "denom25":
            return cls("denomination", k_bar, as_fraction(q), DENOM_25)
        raise ValueError(f"unknown rule {rule!r}")

    def splits(self, d: int, capacity: int) -> bool:
        """Whether a demand is divided at all (strictly above ``q * Q``)."""
        return d > self.q * capacity


def lossless_split(d: int, capacity: int, k_bar: int, q: Rational = 0) -> Partition:
    """Pieces for one demand under the lossless rule.

    A demand larger than ``k_bar * Q`` cannot be covered by ``k_bar`` vehicles, so the
    effective vehicle count is raised to ``ceil(d / Q)``; this keeps every piece <= Q.

    >>> str(lossless_split(7, 10, 2))
    '4 2 1'
    """
    if d < 1 or capacity < 1:
        raise ValueError(f"demand and capacity must be positive, got d={d}, Q={capacity}")
    if not d > as_fraction(q) * capacity:
        return Partition([d])
    k_eff = max(k_bar, -(-d // capacity))
    return mscp(d, k_eff)


def denomination_split(d: int, capacity: int, denominations=DENOM_20) -> Partition:
    """Greedy largest-denomination-first split, then at most one remainder piece.

    Piece sizes are ``floor(fraction * Q)`` with a floor of 1.

    >>> str(denomination_split(157, 200))
    '40 40 40 20 10 2 2 2 1'
    """
    if d < 1 or capacity < 1:
        raise ValueError(f"demand and capacity must be positive, got d={d}, Q={capacity}")
    pieces = []
    rest = d
    for frac in denominations:
        size = max(1, int(as_fraction(frac) * capacity))
        count, rest = divmod(rest, size)
        pieces.extend([size] * count)
    if rest:
        pieces.append(rest)
    return Partition(pieces)


def split_demand(d: int, capacity: int, policy: SplitPolicy) -> Partition:
    if not policy.splits(d, capacity):
        return Partition([d])
    if policy.kind == "lossless":
        return lossless_split(d, capacity, policy.k_bar, policy.q)
    return denomination_split(d, capacity, policy.denominations)


def expanded_size(instance: "VrpInstance", policy: SplitPolicy) -> int:
    """Number of customer copies after splitting (depot excluded)."""
    return sum(len(split_demand(c.demand, instance.capacity, policy)) for c in instance.customers)


def problem_size(instance: "VrpInstance", policy: SplitPolicy) -> int:
    """Node count of the reduced problem, depot included (the benchmark tables' convention)."""
    return expanded_size(instance, policy) + 1


def full_policy(instance: "VrpInstance") -> SplitPolicy:
    """The unreduced lossless policy: ``k_bar`` equal to the fleet size and ``q = 0``."""
    return SplitPolicy("lossless", instance.fleet_size, Fraction(0))


def full_size(instance: "VrpInstance") -> int:
    return problem_size(instance, full_policy(instance))


def rescale_granularity(instance: "VrpInstance", factor: int) -> "VrpInstance":
    """Multiply every demand and the capacity by ``factor`` (a finer unit of commodity)."""
    if factor < 1:
        raise ValueError(f"factor must be >= 1, got {factor}")
    capacity = instance.capacity * factor
    if capacity > DEMAND_LIMIT or any(n.demand * factor > DEMAND_LIMIT for n in instance.nodes):
        raise OverflowError(f"rescaling by {factor} exceeds the demand limit {DEMAND_LIMIT}")
    nodes = tuple(dataclasses.replace(n, demand=n.demand * factor) for n in instance.nodes)
    return dataclasses.replace(instance, nodes=nodes, capacity=capacity)
