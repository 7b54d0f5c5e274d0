"""The two kernel backends must agree swap-for-swap and eval-for-eval."""

import random

import pytest

from fuzzsmith.kernels import get_backend, pure

try:
    from fuzzsmith.kernels import compiled
except ImportError:
    compiled = None

BACKENDS = [pure] + ([compiled] if compiled is not None else [])


def random_instance(rng, max_m=14, universe=24):
    m = rng.randint(2, max_m)
    n = rng.randint(1, m)
    sets = [frozenset(rng.sample(range(universe), rng.randint(0, 12))) for _ in range(m)]
    init = rng.sample(range(m), n)
    return sets, init


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.__name__.split(".")[-1])
def test_union_size_matches_frozenset_union(backend):
    rng = random.Random(7)
    for _ in range(50):
        sets, init = random_instance(rng)
        matrix = backend.CoverMatrix(sets)
        expected = len(frozenset().union(*(sets[i] for i in init)))
        assert matrix.union_size(init) == expected


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.__name__.split(".")[-1])
def test_greedy_scan_is_locally_optimal(backend):
    rng = random.Random(11)
    for _ in range(60):
        sets, init = random_instance(rng)
        matrix = backend.CoverMatrix(sets)
        members, _ = matrix.greedy_scan(init)
        base = matrix.union_size(members)
        assert base >= matrix.union_size(init)
        for s in members:
            for t in range(len(sets)):
                if t in members:
                    continue
                swapped = [t if x == s else x for x in members]
                assert matrix.union_size(swapped) <= base


@pytest.mark.skipif(compiled is None, reason="compiled kernel not built")
def test_backends_agree_exactly():
    rng = random.Random(42)
    for _ in range(300):
        sets, init = random_instance(rng)
        rp = pure.CoverMatrix(sets).greedy_scan(list(init))
        rc = compiled.CoverMatrix(sets).greedy_scan(list(init))
        assert rp == rc


def test_backend_selection_env(monkeypatch):
    assert get_backend("pure") is pure
    with pytest.raises(ValueError):
        get_backend("nope")
    monkeypatch.setenv("FUZZSMITH_KERNEL", "pure")
    assert get_backend() is pure
