"""Integer partitions and minimum-size coalescing partitions.

A partition ``mu`` of ``n`` *coalesces to* a partition ``lam`` of ``n`` when the
parts of ``mu`` can be grouped into disjoint subsets whose sums are exactly the
parts of ``lam``.  :func:`mscp` builds the smallest partition that coalesces to
every partition of ``n`` with at most ``k`` parts by repeatedly breaking off the
ceiling of the remaining amount divided by ``k``.

The exhaustive routines here (:func:`coalesces_to`, :func:`coalesces_to_all`,
:func:`verify_minimality`) are oracles: they never rely on the construction
they are used to check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional


class CoalesceError(ValueError):
    """Raised when the greedy placement cannot form the target partition."""


class SearchBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Partition:
    """A multiset of positive integers, stored sorted in descending order.

    Equality is multiset equality: ``Partition([1, 3, 2]) == Partition([3, 2, 1])``.
    """

    parts: tuple[int, ...]
    n: int = field(init=False, compare=False)

    def __init__(self, parts: Iterable[int]):
        parts = tuple(sorted((int(p) for p in parts), reverse=True))
        if not parts:
            raise ValueError("a partition needs at least one part")
        if parts[-1] < 1:
            raise ValueError(f"parts must be positive, got {parts}")
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "n", sum(parts))

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def __str__(self) -> str:
        return " ".join(map(str, self.parts))


@dataclass(frozen=True)
class CoalesceAssignment:
    """``groups[i]`` holds the indices of source parts that sum to target part ``i``."""

    groups: tuple[tuple[int, ...], ...]

    def is_valid(self, mu: Partition, lam: Partition) -> bool:
        if len(self.groups) != len(lam):
            return False
        used = [i for g in self.groups for i in g]
        if sorted(used) != list(range(len(mu))):
            return False
        return all(sum(mu[i] for i in g) == lam[t] for t, g in enumerate(self.groups))

    def sums(self, mu: Partition) -> tuple[tuple[int, ...], ...]:
        """The source part values in each group, e.g. ``((3, 1), (2, 1), (2,))``."""
        return tuple(tuple(mu[i] for i in g) for g in self.groups)


def _check_positive(**kwargs: int) -> None:
    for name, value in kwargs.items():
        if value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value}")


def _partitions_desc(n: int, max_parts: int, max_part: int) -> Iterator[tuple[int, ...]]:
    # Yields in lexicographically descending order.
    if n == 0:
        yield ()
        return
    if max_parts == 0:
        return
    for first in range(min(n, max_part), 0, -1):
        # the remaining parts cannot cover the rest
        if first * max_parts < n:
            break
        for rest in _partitions_desc(n - first, max_parts - 1, first):
            yield (first,) + rest


def iter_partitions(n: int, max_parts: Optional[int] = None) -> Iterator[Partition]:
    """Lazily yield every partition of ``n`` with at most ``max_parts`` parts."""
    _check_positive(n=n)
    max_parts = n if max_parts is None else max_parts
    _check_positive(max_parts=max_parts)
    for parts in _partitions_desc(n, max_parts, n):
        yield Partition(parts)


def enumerate_partitions(n: int, max_parts: int) -> list[Partition]:
    """All partitions of ``n`` with at most ``max_parts`` parts, lexicographically descending.

    >>> [str(p) for p in enumerate_partitions(5, 2)]
    ['5', '4 1', '3 2']
    """
    return list(iter_partitions(n, max_parts))


def coalesces_to(mu: Partition, lam: Partition) -> Optional[CoalesceAssignment]:
    """Search exhaustively for a grouping of ``mu`` that forms ``lam``.

    Returns ``None`` when no grouping exists.  Parts of ``mu`` are placed largest
    first, each into the open target with the largest remaining deficit first;
    dead states are memoised on ``(next part index, sorted deficits)``.
    """
    if mu.n != lam.n:
        raise ValueError(f"sums differ: {mu.n} != {lam.n}")
    parts = mu.parts
    smallest = parts[-1]
    remaining = list(lam.parts)
    owner = [-1] * len(parts)
    dead: set[tuple[int, tuple[int, ...]]] = set()

    def place(i: int) -> bool:
        if i == len(parts):
            return True
        key = (i, tuple(sorted(remaining)))
        if key in dead:
            return False
        p = parts[i]
        seen: set[int] = set()
        for t in sorted(range(len(remaining)), key=lambda t: (-remaining[t], t)):
            r = remaining[t]
            if r < p:
                break
            # equal deficits are interchangeable; a leftover gap below the smallest part is unfillable
            if r in seen or 0 < r - p < smallest:
                continue
            seen.add(r)
            remaining[t] -= p
            owner[i] = t
            if place(i + 1):
                return True
            remaining[t] += p
        dead.add(key)
        return False

    if not place(0):
        return None
    groups: list[list[int]] = [[] for _ in lam.parts]
    for i, t in enumerate(owner):
        groups[t].append(i)
    return CoalesceAssignment(tuple(tuple(g) for g in groups))


def coalesces_to_all(mu: Partition, k: int) -> bool:
    """True iff ``mu`` coalesces to every partition of ``mu.n`` with at most ``k`` parts."""
    _check_positive(k=k)
    return all(coalesces_to(mu, lam) is not None for lam in iter_partitions(mu.n, k))


def greedy_coalesce(mu: Partition, gamma: Partition) -> CoalesceAssignment:
    """Form ``gamma`` from ``mu`` without backtracking.

    Parts of ``mu`` are taken in descending order; each goes to the largest part of
    ``gamma`` whose sum still has room for it.  This cannot get stuck when ``mu``
    coalesces to all partitions with ``len(gamma)`` or more parts, so a failure
    means ``mu`` was not lossless for ``gamma``.
    """
    if mu.n != gamma.n:
        raise ValueError(f"sums differ: {mu.n} != {gamma.n}")
    room = list(gamma.parts)
    groups: list[list[int]] = [[] for _ in room]
    for i, p in enumerate(mu.parts):
        # gamma is sorted descending, so the first target with room is the largest one
        target = next((t for t, r in enumerate(room) if r >= p), None)
        if target is None:
            raise CoalesceError(
                f"part {p} of {mu} does not fit any remaining sum while forming {gamma}"
            )
        room[target] -= p
        groups[target].append(i)
    return CoalesceAssignment(tuple(tuple(g) for g in groups))


def mscp(n: int, k: int) -> Partition:
    """Minimum-size partition of ``n`` that coalesces to all partitions with at most ``k`` parts.

    >>> str(mscp(7, 3))
    '3 2 1 1'
    """
    _check_positive(n=n, k=k)
    parts = []
    rest = n
    while rest > 0:
        piece = -(-rest // k)
        parts.append(piece)
        rest -= piece
    return Partition(parts)


def mscp_size(n: int, k: int) -> int:
    _check_positive(n=n, k=k)
    size = 0
    while n > 0:
        n -= -(-n // k)
        size += 1
    return size


def size_bound(n: int, k: int) -> int:
    """``ceil(log_{k/(k-1)} n) + 1``, evaluated in exact integer arithmetic."""
    _check_positive(n=n)
    if k < 2:
        raise ValueError(f"the size bound needs k >= 2, got {k}")
    # smallest t with (k/(k-1))**t >= n  <=>  k**t >= n * (k-1)**t
    t = 0
    num, den = 1, 1
    while num < n * den:
        num *= k
        den *= k - 1
        t += 1
    return t + 1


def mscp_table(n_max: int, k_max: int) -> list[list[int]]:
    """Rows ``k = 1..k_max``, columns ``n = 1..n_max`` of :func:`mscp_size`."""
    _check_positive(n_max=n_max, k_max=k_max)
    return [[mscp_size(n, k) for n in range(1, n_max + 1)] for k in range(1, k_max + 1)]


def verify_minimality(n: int, k: int, budget: int = 200_000) -> bool:
    """Brute-force check that nothing smaller than :func:`mscp` coalesces to all k-partitions.

    Every partition of ``n`` with fewer parts than ``mscp_size(n, k)`` is tested with
    :func:`coalesces_to_all`.  ``budget`` caps the number of candidate partitions.
    """
    target = mscp_size(n, k)
    if target == 1:
        return True
    for count, candidate in enumerate(iter_partitions(n, target - 1), start=1):
        if count > budget:
            raise SearchBudgetExceeded(
                f"more than {budget} candidate partitions of {n} with < {target} parts"
            )
        if coalesces_to_all(candidate, k):
            return False
    return True
