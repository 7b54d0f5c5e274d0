"""Built-in toy targets for offline runs and tests.

The balanced-parenthesis checker is a 13-line program: "(" pushes, ")"
pops when a "(" is on the stack and otherwise rejects, any other
character is an error, and the final line accepts when the stack is
empty.  Coverage units are the line ids of that program, attributed by
behavior arm:

    1-3   entry and scan loop (every execution)
    4-5   a "(" was pushed
    6-7   a ")" reached the pop attempt
    8     the pop matched
    9-10  the pop failed; input rejected
    11-12 an illegal character; error exit
    13    the final balance check accepted

The checker is pure and thread-safe; measuring a test case twice always
yields the same unit set.
"""

from __future__ import annotations

from .coverage import CoverSet

ENTRY_UNITS = frozenset({1, 2, 3})
PUSH_UNITS = frozenset({4, 5})
POP_TRY_UNITS = frozenset({6, 7})
POP_OK_UNIT = frozenset({8})
POP_FAIL_UNITS = frozenset({9, 10})
ILLEGAL_UNITS = frozenset({11, 12})
BALANCED_UNIT = frozenset({13})

ALL_UNITS = CoverSet(range(1, 14))


class ToySutBalancedParens:
    """Line-coverage emulation of the balanced-parenthesis checker."""

    name = "balanced-parens"

    def trace(self, data: bytes) -> CoverSet:
        """Executed line ids for one input."""
        units = set(ENTRY_UNITS)
        depth = 0
        for byte in data:
            c = chr(byte)
            if c == "(":
                units |= PUSH_UNITS
                depth += 1
            elif c == ")":
                units |= POP_TRY_UNITS
                if depth > 0:
                    units |= POP_OK_UNIT
                    depth -= 1
                else:
                    units |= POP_FAIL_UNITS
                    return CoverSet(units)
            else:
                units |= ILLEGAL_UNITS
                return CoverSet(units)
        if depth == 0:
            units |= BALANCED_UNIT
        return CoverSet(units)


_REGISTRY = {
    ToySutBalancedParens.name: ToySutBalancedParens,
}


class UnknownToySutError(KeyError):
    pass


def get_toy_sut(name: str):
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise UnknownToySutError(
            f"unknown toy target {name!r}; known: {sorted(_REGISTRY)}"
        ) from None


def toy_sut_names() -> list[str]:
    return sorted(_REGISTRY)
