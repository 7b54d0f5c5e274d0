"""Engine configuration files: INI sections with strict key checking.

Every knob of a run lives in the config file so experiments are
reproducible from a single document; command-line flags only carry
paths and the resume switch.  Unknown sections or keys are rejected by
name.  Defaults match the reference settings: 50 iterations, 200
mutants, 10 survivors, 1000-input cover measurements, temperature 0.2,
repetition penalty 1.15, 8192-token prompt limit.
"""

from __future__ import annotations

import configparser
import shlex
from dataclasses import dataclass
from pathlib import Path

from .evolution import ABLATIONS, EvolutionConfig
from .harness import ApproxCovConfig, ExternalHarness, RunnerConfig, ToySut
from .llm import LlmConfig, MockLlmRules
from .mutation import MutatorKind
from .zest import ZestConfig


class ConfigError(ValueError):
    pass


_SCHEMA: dict[str, set[str]] = {
    "sut": {"backend", "toy_name", "harness_command", "harness_timeout", "format_name", "format_hint"},
    "runner": {"command", "per_mutant_timeout", "max_testcase_bytes"},
    "llm": {
        "backend",
        "endpoint",
        "model",
        "temperature",
        "repetition_penalty",
        "max_total_tokens",
        "max_new_tokens",
        "request_timeout",
        "retries",
        "max_concurrent_requests",
        "fim_mode",
        "fim_prefix_token",
        "fim_suffix_token",
        "fim_middle_token",
        "api_key",
        "mock_seed",
        "mock_pool",
        "invalid_rate",
    },
    "evolution": {
        "iterations",
        "mutants_per_iteration",
        "survivors",
        "rng_seed",
        "enabled_mutators",
        "ablation",
        "inputs_per_measurement",
        "time_budget",
        "max_infill_span",
        "seed_template_path",
    },
    "selection": {"restarts"},
    "zest": {"population", "budget", "command", "rng_seed", "initial_len"},
}


@dataclass
class EngineSetup:
    """Everything a CLI run needs, parsed and validated."""

    evolution: EvolutionConfig
    zest_command: tuple[str, ...] | None
    zest_population: int
    zest_budget: int
    zest_rng_seed: int
    zest_initial_len: int

    def zest_config(self) -> ZestConfig:
        if self.zest_command is None:
            raise ConfigError("config has no [zest] command")
        runner = RunnerConfig(
            runner_command=self.zest_command,
            per_mutant_timeout=self.evolution.runner.per_mutant_timeout,
            max_testcase_bytes=self.evolution.runner.max_testcase_bytes,
        )
        return ZestConfig(
            runner=runner,
            backend=self.evolution.sut,
            population=self.zest_population,
            rng_seed=self.zest_rng_seed,
            initial_len=self.zest_initial_len,
        )


def _validate_keys(parser: configparser.ConfigParser, path: Path) -> None:
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{path}: unknown key {key!r} in section [{section}]")


def _get(parser, section, key, default=None, convert=str):
    if parser.has_option(section, key):
        raw = parser.get(section, key)
        try:
            return convert(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from exc
    return default


def _to_boolish_mutators(raw: str) -> frozenset[MutatorKind]:
    kinds = set()
    for token in raw.replace(",", " ").split():
        try:
            kinds.add(MutatorKind(token.strip().lower()))
        except ValueError:
            raise ConfigError(f"unknown mutator kind: {token!r}") from None
    if not kinds:
        raise ConfigError("enabled_mutators must name at least one mutator")
    return frozenset(kinds)


def load_config(path: str | Path) -> EngineSetup:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(path.read_text())
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    _validate_keys(parser, path)

    # [sut]
    backend_kind = _get(parser, "sut", "backend", "toy")
    if backend_kind == "toy":
        sut = ToySut(_get(parser, "sut", "toy_name", "balanced-parens"))
    elif backend_kind == "external":
        command = _get(parser, "sut", "harness_command")
        if not command:
            raise ConfigError("[sut] backend=external requires harness_command")
        sut = ExternalHarness(
            command=tuple(shlex.split(command)),
            timeout=_get(parser, "sut", "harness_timeout", 30.0, float),
        )
    else:
        raise ConfigError(f"unknown [sut] backend: {backend_kind!r}")
    format_name = _get(parser, "sut", "format_name", "text")
    format_hint = _get(parser, "sut", "format_hint", "")

    # [runner]
    command = _get(parser, "runner", "command")
    if not command:
        raise ConfigError("[runner] command is required")
    try:
        runner = RunnerConfig(
            runner_command=tuple(shlex.split(command)),
            per_mutant_timeout=_get(parser, "runner", "per_mutant_timeout", 30.0, float),
            max_testcase_bytes=_get(parser, "runner", "max_testcase_bytes", 1 << 20, int),
        )
    except ValueError as exc:
        raise ConfigError(f"[runner] {exc}") from exc

    # [llm]
    llm_backend = _get(parser, "llm", "backend", "mock")
    if llm_backend == "mock":
        llm = MockLlmRules(
            seed=_get(parser, "llm", "mock_seed", 0, int),
            pool_name=_get(parser, "llm", "mock_pool", "parens"),
            invalid_rate=_get(parser, "llm", "invalid_rate", 0.1, float),
        )
    elif llm_backend == "http":
        llm = LlmConfig(
            endpoint_url=_get(parser, "llm", "endpoint", ""),
            model_name=_get(parser, "llm", "model", ""),
            temperature=_get(parser, "llm", "temperature", 0.2, float),
            repetition_penalty=_get(parser, "llm", "repetition_penalty", 1.15, float),
            max_total_tokens=_get(parser, "llm", "max_total_tokens", 8192, int),
            max_new_tokens=_get(parser, "llm", "max_new_tokens", 512, int),
            request_timeout=_get(parser, "llm", "request_timeout", 120.0, float),
            retries=_get(parser, "llm", "retries", 3, int),
            max_concurrent_requests=_get(parser, "llm", "max_concurrent_requests", 8, int),
            fim_mode=_get(parser, "llm", "fim_mode", "sentinel"),
            fim_prefix_token=_get(parser, "llm", "fim_prefix_token", "<PRE>"),
            fim_suffix_token=_get(parser, "llm", "fim_suffix_token", "<SUF>"),
            fim_middle_token=_get(parser, "llm", "fim_middle_token", "<MID>"),
            api_key=_get(parser, "llm", "api_key", ""),
        )
        if not llm.endpoint_url:
            raise ConfigError("[llm] backend=http requires endpoint")
    else:
        raise ConfigError(f"unknown [llm] backend: {llm_backend!r}")

    # [evolution]
    ablation = _get(parser, "evolution", "ablation", "none")
    if ablation not in ABLATIONS:
        raise ConfigError(f"unknown ablation: {ablation!r}")
    enabled = _get(
        parser,
        "evolution",
        "enabled_mutators",
        frozenset(MutatorKind),
        _to_boolish_mutators,
    )
    removed = {
        "noSP": MutatorKind.SPLICING,
        "noCP": MutatorKind.COMPLETION,
        "noIN": MutatorKind.INFILLING,
    }.get(ablation)
    if removed is not None:
        enabled = frozenset(enabled - {removed})
        if not enabled:
            raise ConfigError(f"ablation {ablation} leaves no enabled mutators")

    seed_template = None
    template_path = _get(parser, "evolution", "seed_template_path")
    if template_path:
        template_file = Path(template_path)
        if not template_file.is_absolute():
            template_file = path.parent / template_file
        if not template_file.is_file():
            raise ConfigError(f"seed_template_path not found: {template_file}")
        seed_template = template_file.read_text()

    approx = ApproxCovConfig(
        inputs_per_measurement=_get(parser, "evolution", "inputs_per_measurement", 1000, int),
        time_budget=_get(parser, "evolution", "time_budget", None, float),
    )

    try:
        evolution = EvolutionConfig(
            runner=runner,
            sut=sut,
            iterations=_get(parser, "evolution", "iterations", 50, int),
            mutants_per_iteration=_get(parser, "evolution", "mutants_per_iteration", 200, int),
            survivors=_get(parser, "evolution", "survivors", 10, int),
            rng_seed=_get(parser, "evolution", "rng_seed", 0, int),
            approx=approx,
            llm=llm,
            enabled_mutators=enabled,
            selection_restarts=_get(parser, "selection", "restarts", 10, int),
            ablation=ablation,
            format_name=format_name,
            format_hint=format_hint,
            max_infill_span=_get(parser, "evolution", "max_infill_span", 3, int),
            seed_template=seed_template,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    zest_command = _get(parser, "zest", "command")
    return EngineSetup(
        evolution=evolution,
        zest_command=tuple(shlex.split(zest_command)) if zest_command else None,
        zest_population=_get(parser, "zest", "population", 3, int),
        zest_budget=_get(parser, "zest", "budget", 500, int),
        zest_rng_seed=_get(parser, "zest", "rng_seed", 0, int),
        zest_initial_len=_get(parser, "zest", "initial_len", 64, int),
    )
