"""Minimal runner honoring the engine's candidate protocol, for tests.

argv: gen_runner.py <source_path> <seed> <count> <out_dir> [--bytes <path>]

Loads the candidate source, finds the gen_* entry point, and calls it
once per case with a fresh choice stream and a text buffer, writing
zero-padded .bin files.  Any uncaught exception exits 1.  The polished
reference runner lives in the separate runner-shim package; this copy
keeps the engine's test suite self-contained.
"""

import io
import random
import sys


class SeededStream:
    """Choice stream over a seeded PRNG: read_byte, read_chars, randint."""

    def __init__(self, seed, index):
        self._rng = random.Random(f"{seed}:{index}")

    def read_byte(self):
        return self._rng.randrange(256)

    def read_chars(self, count):
        return "".join(chr(32 + self._rng.randrange(256) % 95) for _ in range(count))

    def randint(self, low, high):
        return self._rng.randint(low, high)


class ByteStream:
    """Choice stream over a byte array; reads wrap around the end."""

    def __init__(self, data):
        if not data:
            raise ValueError("byte stream must be non-empty")
        self._data = data
        self._cursor = 0

    def read_byte(self):
        value = self._data[self._cursor % len(self._data)]
        self._cursor += 1
        return value

    def read_chars(self, count):
        return "".join(chr(32 + self.read_byte() % 95) for _ in range(count))

    def randint(self, low, high):
        if high < low:
            raise ValueError("empty range")
        value = (self.read_byte() << 8) | self.read_byte()
        return low + value % (high - low + 1)


def find_entry(namespace):
    for name, value in namespace.items():
        if name.startswith("gen_") and callable(value):
            return value
    raise LookupError("no gen_* entry point in candidate source")


def main(argv):
    source_path, seed, count, out_dir = argv[0], int(argv[1]), int(argv[2]), argv[3]
    bytes_data = None
    if len(argv) > 4:
        if argv[4] != "--bytes" or len(argv) < 6:
            raise SystemExit("usage: gen_runner.py SOURCE SEED COUNT OUT_DIR [--bytes PATH]")
        with open(argv[5], "rb") as fh:
            bytes_data = fh.read()

    with open(source_path) as fh:
        code = fh.read()
    namespace = {}
    exec(compile(code, source_path, "exec"), namespace)
    entry = find_entry(namespace)

    for i in range(count):
        stream = ByteStream(bytes_data) if bytes_data is not None else SeededStream(seed, i)
        out = io.StringIO()
        entry(stream, out)
        with open(f"{out_dir}/{i:06d}.bin", "wb") as fh:
            fh.write(out.getvalue().encode())
    return 0


if __name__ == "__main__":
    try:
        sys.exit(main(sys.argv[1:]))
    except Exception:
        import traceback

        traceback.print_exc()
        sys.exit(1)
