"""Cover sets: the coverage footprint a fuzzer leaves on a target.

A cover set is a finite set of opaque non-negative coverage-unit ids
(line ids for the built-in toy target, edge ids for external harnesses).
Ids are stable across runs for the same target build.  Set algebra is
exact; serialization is the sorted id sequence.
"""

from __future__ import annotations

from collections.abc import Iterable


class CoverSet:
    """Immutable, duplicate-free set of coverage-unit ids."""

    __slots__ = ("_units",)

    def __init__(self, units: Iterable[int] = ()):
        units = frozenset(units)
        for u in units:
            if not isinstance(u, int) or u < 0:
                raise ValueError(f"coverage unit ids must be non-negative ints, got {u!r}")
        self._units = units

    @property
    def units(self) -> frozenset[int]:
        return self._units

    def sorted_units(self) -> list[int]:
        return sorted(self._units)

    def union(self, other: "CoverSet") -> "CoverSet":
        return CoverSet(self._units | other._units)

    def __or__(self, other: "CoverSet") -> "CoverSet":
        return self.union(other)

    def issubset(self, other: "CoverSet") -> bool:
        return self._units <= other._units

    def is_proper_subset(self, other: "CoverSet") -> bool:
        return self._units < other._units

    def __len__(self) -> int:
        return len(self._units)

    def __contains__(self, unit: int) -> bool:
        return unit in self._units

    def __iter__(self):
        return iter(sorted(self._units))

    def __eq__(self, other) -> bool:
        return isinstance(other, CoverSet) and self._units == other._units

    def __hash__(self) -> int:
        return hash(self._units)

    def __repr__(self) -> str:
        return f"CoverSet({self.sorted_units()})"


def union_of(covers: Iterable[CoverSet]) -> CoverSet:
    acc: frozenset[int] = frozenset()
    for c in covers:
        acc |= c.units
    return CoverSet(acc)
