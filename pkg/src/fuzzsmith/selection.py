"""Max-cover survivor selection.

Selecting N survivors from a pool of M candidates maximizes the
cardinality of the union of their cover sets.  The exact problem is the
set-cover problem, so the production path is a restarted greedy
substitution search; a brute-force enumerator is kept alongside as the
oracle for small instances and must never be replaced by the same code
path it checks.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
from collections.abc import Sequence
from dataclasses import dataclass

from . import kernels
from .coverage import CoverSet

logger = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT = 10**6


@dataclass(frozen=True)
class SelectionConfig:
    """Survivor count, restart count, and the RNG seed for the random starts."""

    n_survivors: int = 10
    restarts: int = 10
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_survivors < 1:
            raise ValueError("n_survivors must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass(frozen=True)
class SelectionResult:
    selected: frozenset
    union_size: int


class PoolTooSmallError(ValueError):
    pass


def _prepare(cov_sets: Sequence[tuple[object, CoverSet]]):
    """Sort the pool by id and pack covers into the active bitset kernel."""
    ordered = sorted(cov_sets, key=lambda pair: pair[0])
    ids = [pair[0] for pair in ordered]
    matrix = kernels.CoverMatrix([pair[1].units for pair in ordered])
    return ids, matrix


def greedy_max(
    cov_sets: Sequence[tuple[object, CoverSet]],
    cfg: SelectionConfig,
    rng: random.Random,
    initial_ids=None,
) -> frozenset:
    """One locally optimal attempt.

    Starts from a uniformly random N-subset (or `initial_ids` when
    given) and keeps substituting a member for a non-member while some
    substitution strictly increases the union cardinality.  Members and
    candidates are scanned in ascending id order and the first
    improving swap is applied immediately.
    """
    n = cfg.n_survivors
    if len(cov_sets) < n:
        raise PoolTooSmallError(f"pool of {len(cov_sets)} cannot fill {n} survivor slots")
    ids, matrix = _prepare(cov_sets)
    if initial_ids is None:
        start = rng.sample(range(len(ids)), n)
    else:
        index_of = {i: pos for pos, i in enumerate(ids)}
        start = [index_of[i] for i in initial_ids]
        if len(set(start)) != n:
            raise ValueError("initial_ids must be n_survivors distinct pool ids")
    members, _ = matrix.greedy_scan(start)
    return frozenset(ids[i] for i in members)


def approx_max(
    cov_sets: Sequence[tuple[object, CoverSet]],
    cfg: SelectionConfig,
    extra_starts: Sequence[Sequence] = (),
) -> SelectionResult:
    """Restarted greedy: best of `restarts` independent attempts.

    Deterministic given `cfg.rng_seed`; ties between attempts are broken
    by the earliest attempt.  `extra_starts` prepends warm-start
    attempts (id subsets) evaluated before the random ones; the
    evolution loop uses this to seed one attempt from the previous
    survivors so the selected union can never regress.
    """
    n = cfg.n_survivors
    if len(cov_sets) < n:
        raise PoolTooSmallError(f"pool of {len(cov_sets)} cannot fill {n} survivor slots")
    ids, matrix = _prepare(cov_sets)
    index_of = {i: pos for pos, i in enumerate(ids)}

    best_members: list[int] | None = None
    best_size = -1

    def consider(start_indices):
        nonlocal best_members, best_size
        members, _ = matrix.greedy_scan(start_indices)
        size = matrix.union_size(members)
        if size > best_size:
            best_members, best_size = members, size

    for warm in extra_starts:
        consider([index_of[i] for i in warm])
    for attempt in range(cfg.restarts):
        rng = random.Random(f"{cfg.rng_seed}:attempt:{attempt}")
        consider(rng.sample(range(len(ids)), n))

    selected = frozenset(ids[i] for i in best_members)
    return SelectionResult(selected=selected, union_size=best_size)


def brute_force_max(
    cov_sets: Sequence[tuple[object, CoverSet]],
    n_survivors: int,
) -> SelectionResult:
    """Exact argmax over all N-subsets; oracle for small instances.

    Ties are broken by the lexicographically smallest id sequence.
    Refuses instances with more than 10^6 subsets.
    """
    m = len(cov_sets)
    if m < n_survivors:
        raise PoolTooSmallError(f"pool of {m} cannot fill {n_survivors} survivor slots")
    if math.comb(m, n_survivors) > BRUTE_FORCE_LIMIT:
        raise ValueError(f"C({m},{n_survivors}) exceeds the brute-force bound")
    ordered = sorted(cov_sets, key=lambda pair: pair[0])
    best_ids: tuple = ()
    best_size = -1
    for combo in itertools.combinations(ordered, n_survivors):
        units: frozenset[int] = frozenset()
        for _, cover in combo:
            units |= cover.units
        if len(units) > best_size:
            best_size = len(units)
            best_ids = tuple(pair[0] for pair in combo)
    return SelectionResult(selected=frozenset(best_ids), union_size=best_size)
