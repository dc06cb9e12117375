"""
Depth-first-tree intervals and interval sets

An Interval <s,e> is a vertex's discovery/finish timestamp pair. An
IntervalSet is the canonical, sorted, pairwise-separated collection a
vertex carries once non-tree edges have been merged into it: two members
always satisfy e_i < s_j - 1, so members closer than that are fused into
their convex hull.
"""

from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Tuple


@dataclass(frozen=True, order=True)
class Interval:
    s: int
    e: int

    def __post_init__(self):
        if self.s < 0 or self.e <= self.s:
            raise ValueError(f"invalid interval <{self.s},{self.e}>: need e > s >= 0")

    def __str__(self) -> str:
        return f"<{self.s},{self.e}>"


def subsumes(a: Interval, b: Interval) -> bool:
    """a contains b: s_a <= s_b and e_a >= e_b"""
    return a.s <= b.s and a.e >= b.e


def separated(a: Interval, b: Interval) -> bool:
    return a.e < b.s - 1 or b.e < a.s - 1


def _coalesce(items: List[Interval]) -> Tuple[Interval, ...]:
    if not items:
        return ()
    items.sort()
    out: List[Interval] = []
    cs, ce = items[0].s, items[0].e
    for iv in items[1:]:
        if iv.s <= ce + 1:
            if iv.e > ce:
                ce = iv.e
        else:
            out.append(Interval(cs, ce))
            cs, ce = iv.s, iv.e
    out.append(Interval(cs, ce))
    return tuple(out)


class IntervalSet:
    """Immutable canonical interval set (the per-vertex Π)"""

    __slots__ = ("_items", "_starts")

    def __init__(self, intervals: Iterable[Interval] = ()):
        self._items: Tuple[Interval, ...] = _coalesce(list(intervals))
        self._starts: Tuple[int, ...] = tuple(iv.s for iv in self._items)

    @classmethod
    def single(cls, s: int, e: int) -> "IntervalSet":
        out = cls.__new__(cls)
        out._items = (Interval(s, e),)
        out._starts = (s,)
        return out

    @classmethod
    def _canonical(cls, items: Tuple[Interval, ...]) -> "IntervalSet":
        out = cls.__new__(cls)
        out._items = items
        out._starts = tuple(iv.s for iv in items)
        return out

    @property
    def intervals(self) -> Tuple[Interval, ...]:
        return self._items

    def __iter__(self) -> Iterator[Interval]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __bool__(self) -> bool:
        return bool(self._items)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, IntervalSet) and self._items == other._items

    def __hash__(self) -> int:
        return hash(self._items)

    def __str__(self) -> str:
        return "{" + ",".join(str(iv) for iv in self._items) + "}"

    __repr__ = __str__

    def is_canonical(self) -> bool:
        items = self._items
        return all(
            items[i].s < items[i + 1].s and separated(items[i], items[i + 1])
            for i in range(len(items) - 1)
        )

    def container_of(self, b: Interval) -> bool:
        """Some member contains b; members are disjoint so only one can"""
        i = bisect_right(self._starts, b.s) - 1
        return i >= 0 and self._items[i].e >= b.e

    def merge(self, other: "IntervalSet") -> "IntervalSet":
        """The ∪ meet: canonical hull-coalesced union of both point sets"""
        if not other._items or other is self:
            return self
        if not self._items:
            return other
        if all(self.container_of(b) for b in other._items):
            return self
        return IntervalSet._canonical(_coalesce(list(self._items) + list(other._items)))

    __or__ = merge


EMPTY = IntervalSet()


def set_subsumes(pi_i: IntervalSet, pi_j: IntervalSet) -> bool:
    """Some member of pi_i contains some member of pi_j (sorted/bisect path)"""
    if not pi_i or not pi_j:
        return False
    return any(pi_i.container_of(b) for b in pi_j)


def set_subsumes_naive(pi_i: IntervalSet, pi_j: IntervalSet) -> bool:
    """Pairwise reference for set_subsumes"""
    for a in pi_i:
        for b in pi_j:
            if subsumes(a, b):
                return True
    return False


def merge(pi_i: IntervalSet, pi_j: IntervalSet) -> IntervalSet:
    return pi_i.merge(pi_j)
