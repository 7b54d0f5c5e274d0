"""Reference runner for candidate generator programs.

The engine invokes this command once per measurement:

    genrunner <source_path> <seed> <count> <out_dir> [--bytes <bytes_path>]

It loads the candidate source, finds the ``gen_*`` entry point, and
calls it once per case with two arguments: a choice stream and a text
output.  Case ``i`` gets an independent stream derived from
``(seed, i)``, so the written files ``000000.bin`` .. are a pure
function of (source, seed, count).  With ``--bytes`` every case reads
choices from the given byte array instead (wrapping at the end), which
makes the output a pure function of (source, bytes) -- the replay
contract of the engine's byte-evolution mode.

The candidate's semantics are never touched: the entry point is called
exactly as written, only the stream and output objects are supplied.
Any uncaught exception in candidate code exits 1 with the traceback on
stderr; the engine records that as a crashed mutant.  Per-case
timeouts are the engine's job, not the shim's.

The choice-stream surface is fixed so evolved code stays executable
across iterations: ``read_byte()``, ``read_chars(n)``, and
``randint(a, b)``.
"""

from __future__ import annotations

import argparse
import io
import random
import sys
import traceback
from dataclasses import dataclass
from pathlib import Path

__version__ = "0.1.0"

PRINTABLE_BASE = 32
PRINTABLE_SPAN = 95  # space .. tilde


class SeededStream:
    """Per-case choice stream derived from (seed, case index)."""

    def __init__(self, seed: int, index: int):
        self._rng = random.Random(f"{seed}:{index}")

    def read_byte(self) -> int:
        return self._rng.randrange(256)

    def read_chars(self, count: int) -> str:
        return "".join(
            chr(PRINTABLE_BASE + self._rng.randrange(256) % PRINTABLE_SPAN)
            for _ in range(count)
        )

    def randint(self, low: int, high: int) -> int:
        return self._rng.randint(low, high)


class ByteStream:
    """Choice stream over a caller-provided byte array; reads wrap around."""

    def __init__(self, data: bytes):
        if not data:
            raise ValueError("byte stream must be non-empty")
        self._data = data
        self._cursor = 0

    def read_byte(self) -> int:
        value = self._data[self._cursor % len(self._data)]
        self._cursor += 1
        return value

    def read_chars(self, count: int) -> str:
        return "".join(
            chr(PRINTABLE_BASE + self.read_byte() % PRINTABLE_SPAN) for _ in range(count)
        )

    def randint(self, low: int, high: int) -> int:
        if high < low:
            raise ValueError("empty range")
        value = (self.read_byte() << 8) | self.read_byte()
        return low + value % (high - low + 1)


@dataclass(frozen=True)
class RunnerInvocation:
    source_path: Path
    seed: int
    count: int
    out_dir: Path
    bytes_path: Path | None = None


def find_entry(namespace: dict):
    """The generator entry point: the first gen_* callable defined."""
    for name, value in namespace.items():
        if name.startswith("gen_") and callable(value):
            return value
    raise LookupError("candidate source defines no gen_* entry point")


def shim_main(invocation: RunnerInvocation) -> int:
    """Execute the candidate `count` times and write one file per case."""
    code = invocation.source_path.read_text()
    namespace: dict = {}
    exec(compile(code, str(invocation.source_path), "exec"), namespace)
    entry = find_entry(namespace)

    bytes_data = None
    if invocation.bytes_path is not None:
        bytes_data = invocation.bytes_path.read_bytes()

    for index in range(invocation.count):
        if bytes_data is not None:
            stream = ByteStream(bytes_data)
        else:
            stream = SeededStream(invocation.seed, index)
        out = io.StringIO()
        entry(stream, out)
        case_path = invocation.out_dir / f"{index:06d}.bin"
        case_path.write_bytes(out.getvalue().encode())
    return 0


def parse_argv(argv: list[str]) -> RunnerInvocation:
    parser = argparse.ArgumentParser(prog="genrunner", description=__doc__)
    parser.add_argument("source_path", type=Path)
    parser.add_argument("seed", type=int)
    parser.add_argument("count", type=int)
    parser.add_argument("out_dir", type=Path)
    parser.add_argument("--bytes", dest="bytes_path", type=Path, default=None)
    args = parser.parse_args(argv)
    return RunnerInvocation(
        source_path=args.source_path,
        seed=args.seed,
        count=args.count,
        out_dir=args.out_dir,
        bytes_path=args.bytes_path,
    )


def main(argv: list[str] | None = None) -> int:
    invocation = parse_argv(sys.argv[1:] if argv is None else argv)
    try:
        return shim_main(invocation)
    except Exception:
        traceback.print_exc(file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
