import sys
from pathlib import Path

import pytest

from fuzzsmith.harness import ApproxCovConfig, RunnerConfig, ToySut

HELPERS = Path(__file__).parent / "helpers"
RUNNER_SCRIPT = HELPERS / "gen_runner.py"


def runner_command(*extra: str) -> tuple[str, ...]:
    return (
        sys.executable,
        str(RUNNER_SCRIPT),
        "{source_path}",
        "{seed}",
        "{count}",
        "{out_dir}",
        *extra,
    )


@pytest.fixture
def toy_runner() -> RunnerConfig:
    return RunnerConfig(runner_command=runner_command(), per_mutant_timeout=20.0)


@pytest.fixture
def bytes_runner() -> RunnerConfig:
    return RunnerConfig(
        runner_command=runner_command("--bytes", "{bytes_path}"),
        per_mutant_timeout=20.0,
    )


@pytest.fixture
def toy_backend() -> ToySut:
    return ToySut("balanced-parens")


@pytest.fixture
def approx_small() -> ApproxCovConfig:
    return ApproxCovConfig(inputs_per_measurement=500)


# Generator sources used across the suite.  They follow the candidate
# protocol (gen_* entry point taking a choice stream and a text output)
# and are written so 500 samples hit every product with near certainty.

OPEN_ONLY_SOURCE = """\
MAX_PARENS = 6

def gen_parens(rng, output):
    parts = []
    while len(parts) < MAX_PARENS:
        if rng.randint(0, 2) == 0:
            parts.append("(")
        else:
            break
    output.write("".join(parts))
"""

STAR_ONLY_SOURCE = """\
MAX_PARENS = 6

def gen_parens(rng, output):
    parts = []
    while len(parts) < MAX_PARENS:
        if rng.randint(0, 2) == 0:
            parts.append("*")
        else:
            break
    output.write("".join(parts))
"""

FULL_ALPHABET_SOURCE = """\
MAX_PARENS = 8

def gen_parens(rng, output):
    parts = []
    while len(parts) < MAX_PARENS:
        choice = rng.randint(0, 3)
        if choice == 0:
            parts.append("(")
        elif choice == 1:
            parts.append(")")
        elif choice == 2:
            parts.append("*")
        else:
            break
    output.write("".join(parts))
"""

EMPTY_ONLY_SOURCE = """\
def gen_parens(rng, output):
    output.write("")
"""

TYPE_ERROR_SOURCE = """\
def gen_parens(rng, output):
    output.write(1 + "")
"""
