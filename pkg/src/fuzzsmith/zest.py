"""Byte-parameterized replay: evolve generator choices with coverage feedback.

A generator normally consumes fresh randomness; replacing the random
source with a caller-provided byte array makes the generated test case
a pure function of (source, bytes).  Byte arrays can then be evolved
like a greybox corpus: mutate, replay, measure, and keep the arrays
that discover new coverage.  This is a proof-of-concept adapter; every
replay spawns a subprocess and measures coverage from scratch, so
throughput is nowhere near a practical fuzzer.
"""

from __future__ import annotations

import logging
import random
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .coverage import CoverSet
from .harness import CoverageBackend, RunnerConfig, measure_cover, run_candidate
from .lattice import ExecutionFailure

logger = logging.getLogger(__name__)

MAX_BYTES = 4096


class ByteChoiceStream:
    """Choice stream backed by a byte array; reads wrap around the end.

    This mirrors the runner's byte mode exactly: read_byte consumes one
    byte, randint consumes two, and read_chars maps bytes into printable
    ASCII.  An empty array is illegal.
    """

    def __init__(self, data: bytes):
        if not data:
            raise ValueError("byte stream must be non-empty")
        self._data = bytes(data)
        self.cursor = 0

    def read_byte(self) -> int:
        value = self._data[self.cursor % len(self._data)]
        self.cursor += 1
        return value

    def read_chars(self, count: int) -> str:
        return "".join(chr(32 + self.read_byte() % 95) for _ in range(count))

    def randint(self, low: int, high: int) -> int:
        if high < low:
            raise ValueError("empty range")
        span = high - low + 1
        value = (self.read_byte() << 8) | self.read_byte()
        return low + value % span


@dataclass(frozen=True)
class ZestConfig:
    """Population size, byte-mutation rates, and the measurement plumbing."""

    runner: RunnerConfig
    backend: CoverageBackend
    population: int = 3
    flip_rate: float | None = None  # default 1/len
    indel_rate: float = 0.1
    max_indel: int = 4
    max_len: int = MAX_BYTES
    initial_len: int = 64
    rng_seed: int = 0

    def __post_init__(self):
        if self.population < 1:
            raise ValueError("population must be >= 1")
        joined = " ".join(self.runner.runner_command)
        if "{bytes_path}" not in joined:
            raise ValueError("zest runner command is missing the {bytes_path} placeholder")


@dataclass
class ZestResult:
    survivors: list[bytes]
    union_sizes: list[int] = field(default_factory=list)
    corpus: list[bytes] = field(default_factory=list)


def replay(fuzzer_source: str, data: bytes, runner: RunnerConfig) -> Union[bytes, ExecutionFailure]:
    """Generate one test case driven entirely by the byte array.

    Two replays with identical (source, bytes) yield byte-identical test
    cases; the runner is invoked in byte-stream mode.
    """
    if not data:
        raise ValueError("byte array must be non-empty")
    with tempfile.TemporaryDirectory(prefix="fuzzsmith-bytes-") as tmp:
        bytes_path = Path(tmp) / "choices.bin"
        bytes_path.write_bytes(data)
        outcome = run_candidate(
            fuzzer_source,
            runner,
            seed=0,
            count=1,
            extra_argv={"bytes_path": str(bytes_path)},
        )
    if isinstance(outcome, ExecutionFailure):
        return outcome
    return outcome[0]


def mutate_bytes(data: bytes, rng: random.Random, cfg: ZestConfig) -> bytes:
    """Per-byte flips plus occasional short inserts/deletes, length clamped."""
    out = bytearray(data)
    rate = cfg.flip_rate if cfg.flip_rate is not None else 1.0 / max(1, len(out))
    for i in range(len(out)):
        if rng.random() < rate:
            out[i] = rng.randrange(256)
    if rng.random() < cfg.indel_rate:
        pos = rng.randrange(len(out) + 1)
        out[pos:pos] = bytes(rng.randrange(256) for _ in range(rng.randint(1, cfg.max_indel)))
    if rng.random() < cfg.indel_rate and len(out) > 1:
        pos = rng.randrange(len(out))
        del out[pos : pos + rng.randint(1, cfg.max_indel)]
    if len(out) > cfg.max_len:
        del out[cfg.max_len :]
    if not out:
        out.append(rng.randrange(256))
    return bytes(out)


def zest_loop(fuzzer_source: str, cfg: ZestConfig, budget: int) -> ZestResult:
    """Evolve byte arrays for `budget` rounds with coverage feedback.

    The population is a FIFO: when a mutated array discovers a unit
    absent from everything recorded so far, the oldest survivor is
    evicted and the mutant appended.  `union_sizes` records the
    cumulative discovered-union size after every round, so the trace is
    non-decreasing and grows strictly at each admission.  Execution
    failures count as not-good and cost a round.
    """
    rng = random.Random(f"{cfg.rng_seed}:zest")
    initial = bytes(rng.randrange(256) for _ in range(cfg.initial_len))
    first_case = replay(fuzzer_source, initial, cfg.runner)
    if isinstance(first_case, ExecutionFailure):
        raise RuntimeError(f"initial replay failed ({first_case.kind}): {first_case.detail}")
    first_cov = measure_cover([first_case], cfg.backend)

    survivors = [initial] * cfg.population
    covs: list[CoverSet] = [first_cov] * cfg.population
    recorded = set(first_cov.units)
    result = ZestResult(survivors=survivors, corpus=[first_case])

    for _ in range(budget):
        mutant = mutate_bytes(survivors[0], rng, cfg)
        case = replay(fuzzer_source, mutant, cfg.runner)
        if not isinstance(case, ExecutionFailure):
            cov = measure_cover([case], cfg.backend)
            if cov.units - recorded:
                survivors.pop(0)
                covs.pop(0)
                survivors.append(mutant)
                covs.append(cov)
                recorded |= cov.units
                result.corpus.append(case)
        result.union_sizes.append(len(recorded))
    result.survivors = survivors
    return result
