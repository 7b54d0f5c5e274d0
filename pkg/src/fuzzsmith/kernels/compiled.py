"""Wrapper exposing the Cython bitset kernel behind the CoverMatrix contract."""

from collections.abc import Iterable, Sequence

import numpy as np

from . import _bitset


class CoverMatrix:
    """Cover sets packed into a dense (M x words) uint64 matrix."""

    def __init__(self, unit_sets: Sequence[Iterable[int]]):
        sets = [frozenset(s) for s in unit_sets]
        universe = sorted(set().union(*sets)) if sets else []
        pos = {u: i for i, u in enumerate(universe)}
        words = max(1, (len(universe) + 63) // 64)
        matrix = np.zeros((len(sets), words), dtype=np.uint64)
        for row, s in enumerate(sets):
            for u in s:
                p = pos[u]
                matrix[row, p >> 6] |= np.uint64(1) << np.uint64(p & 63)
        self._matrix = matrix
        self.universe_size = len(universe)

    @property
    def size(self) -> int:
        return self._matrix.shape[0]

    def union_size(self, indices: Iterable[int]) -> int:
        return _bitset.union_size(self._matrix, list(indices))

    def greedy_scan(self, initial: Iterable[int]) -> tuple[list[int], int]:
        return _bitset.greedy_scan(self._matrix, list(initial))
