"""fuzzsmith: synthesize generation-based fuzzers tailored to a target.

Starting from a naive seed generator, the engine evolves candidate
generator programs with model-driven mutation, compares them by the
exact ranges of code they cover, and exports the strongest survivors'
test cases as seeds for downstream mutation-based fuzzing.
"""

__version__ = "0.1.0"

from .coverage import CoverSet
from .lattice import FuzzerNode, FuzzerSpace, Strength, compare_strength

__all__ = [
    "CoverSet",
    "FuzzerNode",
    "FuzzerSpace",
    "Strength",
    "compare_strength",
    "__version__",
]
