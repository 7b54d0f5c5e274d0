"""Bitset kernels for cover-set algebra.

Two interchangeable backends implement the same `CoverMatrix` contract:

* ``fuzzsmith.kernels.compiled`` -- Cython extension over packed uint64
  words, used for large unit universes (edge coverage of real targets).
* ``fuzzsmith.kernels.pure`` -- plain Python integers as bitmasks.

The active backend is chosen at import time: the compiled one when the
extension built, else the pure one.  ``FUZZSMITH_KERNEL=pure|compiled``
forces a choice (the benchmark suite uses this).  Both backends are
exact and produce identical results; `benchmarks/bench_kernels.py`
compares their speed.
"""

import os

from . import pure

try:
    from . import compiled

    _HAVE_COMPILED = True
except ImportError:  # extension not built
    compiled = None
    _HAVE_COMPILED = False


class KernelUnavailableError(RuntimeError):
    pass


def get_backend(name: str | None = None):
    """Return the kernel module selected by `name`, env var, or autodetect."""
    if name is None:
        name = os.environ.get("FUZZSMITH_KERNEL", "auto")
    if name == "pure":
        return pure
    if name == "compiled":
        if not _HAVE_COMPILED:
            raise KernelUnavailableError("compiled kernel requested but not built")
        return compiled
    if name == "auto":
        return compiled if _HAVE_COMPILED else pure
    raise ValueError(f"unknown kernel backend: {name!r}")


_active = get_backend()

CoverMatrix = _active.CoverMatrix
BACKEND_NAME = "compiled" if _active is compiled else "pure"
