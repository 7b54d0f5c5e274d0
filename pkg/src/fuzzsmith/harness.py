"""Candidate execution and cover-set measurement.

Candidates run through an external runner command (one subprocess per
measurement) so generator programs stay language-agnostic; coverage
comes either from a built-in toy target or from an external harness
command that prints one coverage-unit id per line.  `approx_cov` ties
the two together: run the candidate for a bounded number of inputs,
then take the union of the per-input coverage.
"""

from __future__ import annotations

import logging
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .coverage import CoverSet
from .lattice import ExecutionFailure
from .toysut import get_toy_sut

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunnerConfig:
    """How to invoke the external runner for a candidate source.

    The argv template must contain the {source_path}, {seed}, {count}
    and {out_dir} placeholders; the runner writes zero-padded files
    000000.bin .. into the output directory and exits 0.
    """

    runner_command: tuple[str, ...]
    per_mutant_timeout: float = 30.0
    max_testcase_bytes: int = 1 << 20

    REQUIRED_PLACEHOLDERS = ("{source_path}", "{seed}", "{count}", "{out_dir}")

    def __post_init__(self):
        if self.per_mutant_timeout <= 0:
            raise ValueError("per_mutant_timeout must be positive")
        joined = " ".join(self.runner_command)
        for placeholder in self.REQUIRED_PLACEHOLDERS:
            if placeholder not in joined:
                raise ValueError(f"runner command is missing the {placeholder} placeholder")

    def argv(self, **values: str) -> list[str]:
        return [arg.format(**values) for arg in self.runner_command]


@dataclass(frozen=True)
class ToySut:
    """Coverage backend backed by a built-in toy target."""

    name: str = "balanced-parens"

    def __post_init__(self):
        get_toy_sut(self.name)  # unknown names fail fast


@dataclass(frozen=True)
class ExternalHarness:
    """Coverage backend that runs an argv per test case.

    The command must contain {testcase_path}; its stdout is ASCII
    decimal unit ids, one per line.
    """

    command: tuple[str, ...]
    timeout: float = 30.0

    def __post_init__(self):
        if "{testcase_path}" not in " ".join(self.command):
            raise ValueError("harness command is missing the {testcase_path} placeholder")


CoverageBackend = Union[ToySut, ExternalHarness]


@dataclass(frozen=True)
class ApproxCovConfig:
    """Budget for one cover-set measurement."""

    inputs_per_measurement: int = 1000
    time_budget: float | None = None

    def __post_init__(self):
        if self.inputs_per_measurement < 1:
            raise ValueError("inputs_per_measurement must be >= 1")


class HarnessError(RuntimeError):
    pass


def run_candidate(
    source: str,
    runner: RunnerConfig,
    seed: int,
    count: int,
    extra_argv: dict[str, str] | None = None,
    timeout: float | None = None,
) -> Union[list[bytes], ExecutionFailure]:
    """Execute a candidate and collect its test cases.

    Success requires at least one test-case file within the timeout;
    oversize cases are truncated with a warning.  Runner failures come
    back as ExecutionFailure values so exploration can discard them.
    """
    if not source.strip():
        raise ValueError("candidate source is empty")
    effective_timeout = timeout if timeout is not None else runner.per_mutant_timeout
    with tempfile.TemporaryDirectory(prefix="fuzzsmith-run-") as tmp:
        tmp_path = Path(tmp)
        source_path = tmp_path / "candidate.py"
        source_path.write_text(source)
        out_dir = tmp_path / "cases"
        out_dir.mkdir()
        values = {
            "source_path": str(source_path),
            "seed": str(seed),
            "count": str(count),
            "out_dir": str(out_dir),
        }
        if extra_argv:
            values.update(extra_argv)
        argv = runner.argv(**values)
        try:
            proc = subprocess.run(
                argv,
                capture_output=True,
                timeout=effective_timeout,
            )
        except subprocess.TimeoutExpired:
            return ExecutionFailure("timeout", f"runner exceeded {effective_timeout}s")
        except OSError as exc:
            return ExecutionFailure("crash", f"runner could not start: {exc}")
        if proc.returncode != 0:
            detail = proc.stderr.decode(errors="replace")[-2000:]
            return ExecutionFailure("crash", detail)
        cases = []
        for case_path in sorted(out_dir.iterdir()):
            data = case_path.read_bytes()
            if len(data) > runner.max_testcase_bytes:
                logger.warning(
                    "test case %s exceeds %d bytes; truncating",
                    case_path.name,
                    runner.max_testcase_bytes,
                )
                data = data[: runner.max_testcase_bytes]
            cases.append(data)
        if not cases:
            return ExecutionFailure("empty-output", "runner produced no test cases")
        return cases


def measure_cover(test_cases: list[bytes], backend: CoverageBackend) -> CoverSet:
    """Union of per-test-case coverage under the given backend."""
    if isinstance(backend, ToySut):
        sut = get_toy_sut(backend.name)
        units: set[int] = set()
        for case in test_cases:
            units |= sut.trace(case).units
        return CoverSet(units)
    return _measure_external(test_cases, backend)


def _measure_external(test_cases: list[bytes], backend: ExternalHarness) -> CoverSet:
    units: set[int] = set()
    failures = 0
    with tempfile.TemporaryDirectory(prefix="fuzzsmith-cov-") as tmp:
        case_path = Path(tmp) / "case.bin"
        for case in test_cases:
            case_path.write_bytes(case)
            argv = [arg.format(testcase_path=str(case_path)) for arg in backend.command]
            try:
                proc = subprocess.run(argv, capture_output=True, timeout=backend.timeout)
            except (subprocess.TimeoutExpired, OSError):
                failures += 1
                continue
            if proc.returncode != 0:
                failures += 1
                continue
            for line in proc.stdout.decode(errors="replace").splitlines():
                line = line.strip()
                if line:
                    units.add(int(line))
    if failures:
        logger.warning("coverage harness failed on %d of %d cases", failures, len(test_cases))
        if failures == len(test_cases) and test_cases:
            raise HarnessError("coverage harness failed on every test case")
    return CoverSet(units)


def approx_cov(
    source: str,
    runner: RunnerConfig,
    backend: CoverageBackend,
    cfg: ApproxCovConfig,
    seed: int,
) -> Union[CoverSet, ExecutionFailure]:
    """Bounded-budget estimate of a candidate's cover set.

    Runs the candidate for `inputs_per_measurement` cases (capped by the
    time budget) and measures the union coverage; deterministic given
    the seed and a deterministic runner.
    """
    timeout = runner.per_mutant_timeout
    if cfg.time_budget is not None:
        timeout = min(timeout, cfg.time_budget)
    outcome = run_candidate(
        source, runner, seed=seed, count=cfg.inputs_per_measurement, timeout=timeout
    )
    if isinstance(outcome, ExecutionFailure):
        return outcome
    return measure_cover(outcome, backend)
