"""Pure-Python cover-set kernel: arbitrary-precision ints as bitmasks."""

from collections.abc import Iterable, Sequence


class CoverMatrix:
    """A pool of cover sets packed into bitmasks over a shared universe.

    Unit ids may be any non-negative integers; they are mapped to dense
    bit positions once at construction.  The substitution scan below is
    the hot loop of max-cover selection and must behave identically to
    the compiled backend: members are scanned in ascending index order,
    candidates in ascending index order, and the first strictly
    improving swap is applied immediately.
    """

    def __init__(self, unit_sets: Sequence[Iterable[int]]):
        sets = [frozenset(s) for s in unit_sets]
        universe = sorted(set().union(*sets)) if sets else []
        pos = {u: i for i, u in enumerate(universe)}
        self._masks = []
        for s in sets:
            mask = 0
            for u in s:
                mask |= 1 << pos[u]
            self._masks.append(mask)
        self.universe_size = len(universe)

    @property
    def size(self) -> int:
        return len(self._masks)

    def union_size(self, indices: Iterable[int]) -> int:
        mask = 0
        for i in indices:
            mask |= self._masks[i]
        return mask.bit_count()

    def greedy_scan(self, initial: Iterable[int]) -> tuple[list[int], int]:
        """Run the first-improvement substitution scan from `initial`.

        Returns the locally optimal member indices (sorted) and the
        number of substitution evaluations performed.  Each applied swap
        strictly increases the union cardinality, which bounds the
        number of passes by the universe size.
        """
        masks = self._masks
        m = len(masks)
        selected = set(initial)
        evals = 0
        changed = True
        while changed:
            changed = False
            for s in sorted(selected):
                u_minus = 0
                for j in selected:
                    if j != s:
                        u_minus |= masks[j]
                base = (u_minus | masks[s]).bit_count()
                for t in range(m):
                    if t in selected:
                        continue
                    evals += 1
                    if (u_minus | masks[t]).bit_count() > base:
                        selected.discard(s)
                        selected.add(t)
                        changed = True
                        break
        return sorted(selected), evals
