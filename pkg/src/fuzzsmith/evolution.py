"""The outer evolution loop: seed, mutate, explore, select, repeat.

Every iteration asks the model for a fixed number of mutants over the
current survivors, measures each mutant's cover set, admits the ones
that strengthen the explored lattice, and then keeps the survivor set
whose cover-set union is largest.  State is checkpointed after every
iteration and runs resume deterministically under the mock backend.

One warm-started selection attempt is seeded from the previous
survivors, so the survivor union can never shrink between iterations;
the top-k ablation mode drops that guarantee together with the lattice.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import random
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Union

from .coverage import CoverSet, union_of
from .harness import (
    ApproxCovConfig,
    CoverageBackend,
    RunnerConfig,
    approx_cov,
    measure_cover,
    run_candidate,
)
from .lattice import (
    ExecutionFailure,
    FuzzerNode,
    FuzzerSpace,
    MutantRecord,
    Provenance,
)
from .llm import HttpLlm, LlmConfig, MockLlm, MockLlmRules, run_requests
from .mutation import MutatorKind, plan_requests
from .selection import SelectionConfig, approx_max

logger = logging.getLogger(__name__)

STATE_VERSION = 1
SEED_NODE_ID = "gen000-seed"

DEFAULT_SEED_TEMPLATE = """\
MAX_LEN = 64

def gen_<FORMAT>(rng, output):
    length = rng.randint(0, MAX_LEN)
    output.write(rng.read_chars(length))
"""

ABLATIONS = ("none", "noFS", "noSP", "noCP", "noIN")


class SeedInitError(RuntimeError):
    pass


class CheckpointError(RuntimeError):
    pass


@dataclass(frozen=True)
class EvolutionConfig:
    runner: RunnerConfig
    sut: CoverageBackend
    iterations: int = 50
    mutants_per_iteration: int = 200
    survivors: int = 10
    rng_seed: int = 0
    approx: ApproxCovConfig = field(default_factory=ApproxCovConfig)
    llm: Union[LlmConfig, MockLlmRules] = field(default_factory=MockLlmRules)
    enabled_mutators: frozenset[MutatorKind] = frozenset(MutatorKind)
    selection_restarts: int = 10
    ablation: str = "none"
    format_name: str = "text"
    format_hint: str = ""
    max_infill_span: int = 3
    seed_template: str | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not (1 <= self.survivors <= self.mutants_per_iteration):
            raise ValueError("need 1 <= survivors <= mutants_per_iteration")
        if self.ablation not in ABLATIONS:
            raise ValueError(f"unknown ablation: {self.ablation!r}")

    def config_hash(self) -> str:
        """Stable digest of everything that shapes the run."""
        blob = json.dumps(_jsonable(asdict(self)), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()

    def make_backend(self):
        if isinstance(self.llm, MockLlmRules):
            return MockLlm(self.llm)
        return HttpLlm(self.llm)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted(_jsonable(v) for v in obj)
    if isinstance(obj, MutatorKind):
        return obj.value
    return obj


TREND_COLUMNS = (
    "iteration",
    "survivor_union_size",
    "mutants_valid",
    "mutants_admitted",
    "mutants_discarded_weak",
    "mutants_invalid",
)


@dataclass(frozen=True)
class TrendRow:
    iteration: int
    survivor_union_size: int
    mutants_valid: int
    mutants_admitted: int
    mutants_discarded_weak: int
    mutants_invalid: int


@dataclass
class EvolutionState:
    iteration: int
    space: FuzzerSpace
    survivors: list[str]
    trend: list[TrendRow] = field(default_factory=list)

    def survivor_union(self) -> CoverSet:
        return self.space.union_cover(self.survivors)

    def to_json_dict(self, cfg: EvolutionConfig) -> dict:
        return {
            "version": STATE_VERSION,
            "config_hash": cfg.config_hash(),
            "iteration": self.iteration,
            "survivors": list(self.survivors),
            "trend": [asdict(row) for row in self.trend],
            "space": self.space.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, obj: dict, cfg: EvolutionConfig) -> "EvolutionState":
        if obj.get("version") != STATE_VERSION:
            raise CheckpointError(f"unsupported checkpoint version: {obj.get('version')!r}")
        stored = obj.get("config_hash", "")
        current = cfg.config_hash()
        if stored != current:
            raise CheckpointError(
                f"config hash mismatch: checkpoint {stored[:12]}.. vs current {current[:12]}.."
            )
        return cls(
            iteration=obj["iteration"],
            space=FuzzerSpace.from_json_dict(obj["space"]),
            survivors=list(obj["survivors"]),
            trend=[TrendRow(**row) for row in obj["trend"]],
        )


def _derive_seed(master: int, label: str) -> int:
    digest = hashlib.sha256(f"{master}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def init(cfg: EvolutionConfig, seed_template: str | None = None) -> EvolutionState:
    """Measure the naive seed generator and open the space with it."""
    template = seed_template or cfg.seed_template or DEFAULT_SEED_TEMPLATE
    source = template.replace("<FORMAT>", cfg.format_name)
    outcome = approx_cov(
        source, cfg.runner, cfg.sut, cfg.approx, seed=_derive_seed(cfg.rng_seed, "seed-init")
    )
    if isinstance(outcome, ExecutionFailure):
        raise SeedInitError(f"seed generator failed ({outcome.kind}): {outcome.detail}")
    space = FuzzerSpace()
    space.add_node(
        FuzzerNode(
            id=SEED_NODE_ID,
            source=source,
            provenance=Provenance.seed(),
            cover=outcome,
            iteration_born=0,
        )
    )
    return EvolutionState(iteration=0, space=space, survivors=[SEED_NODE_ID])


def _provenance_for(req) -> Provenance:
    if req.kind is MutatorKind.SPLICING:
        return Provenance.splicing(*req.parents)
    if req.kind is MutatorKind.COMPLETION:
        return Provenance.completion(req.parents[0])
    return Provenance.infilling(req.parents[0])


def step(state: EvolutionState, cfg: EvolutionConfig, backend=None) -> EvolutionState:
    """Run one evolution iteration in place and return the state."""
    if backend is None:
        backend = cfg.make_backend()
    k = state.iteration + 1
    rng = random.Random(f"{cfg.rng_seed}:iter:{k}")
    survivor_sources = [(nid, state.space.node(nid).source) for nid in state.survivors]

    requests = plan_requests(
        survivor_sources,
        cfg.mutants_per_iteration,
        set(cfg.enabled_mutators),
        rng,
        id_prefix=f"gen{k:03d}-m",
        max_span=cfg.max_infill_span,
        format_name=cfg.format_name,
        format_hint=cfg.format_hint,
    )
    max_concurrent = getattr(cfg.llm, "max_concurrent_requests", 1)
    results = run_requests(backend, requests, max_concurrent)

    invalid = 0
    records: list[MutantRecord] = []
    for idx, (req, res) in enumerate(zip(requests, results)):
        if res is None or not res.raw_llm_text.strip():
            invalid += 1
            continue
        outcome = approx_cov(
            res.new_source,
            cfg.runner,
            cfg.sut,
            cfg.approx,
            seed=_derive_seed(cfg.rng_seed, f"cov:{k}:{idx}"),
        )
        if isinstance(outcome, ExecutionFailure):
            invalid += 1
            continue
        records.append(
            MutantRecord(
                id=req.id,
                source=res.new_source,
                provenance=_provenance_for(req),
                outcome=outcome,
            )
        )

    if cfg.ablation == "noFS":
        admitted_count, weak_count = _select_topk(state, cfg, records, k)
    else:
        admitted_count, weak_count = _select_maxcover(state, cfg, records, k)

    valid = len(records)
    assert valid == admitted_count + weak_count
    assert valid + invalid == cfg.mutants_per_iteration
    state.trend.append(
        TrendRow(
            iteration=k,
            survivor_union_size=len(state.survivor_union()),
            mutants_valid=valid,
            mutants_admitted=admitted_count,
            mutants_discarded_weak=weak_count,
            mutants_invalid=invalid,
        )
    )
    state.iteration = k
    return state


def _select_maxcover(
    state: EvolutionState,
    cfg: EvolutionConfig,
    records: list[MutantRecord],
    k: int,
) -> tuple[int, int]:
    """Lattice admission plus max-cover selection over the iteration frontier."""
    report = state.space.explore(records, iteration=k)
    pool_ids = list(dict.fromkeys(state.survivors + [n.id for n in report.admitted]))
    pool = [(nid, state.space.node(nid).cover) for nid in pool_ids]

    if len(pool) <= cfg.survivors:
        if len(pool) < cfg.survivors:
            logger.warning(
                "pool of %d smaller than %d survivor slots; keeping all", len(pool), cfg.survivors
            )
        state.survivors = sorted(pool_ids)
    else:
        warm = _warm_start(state.survivors, pool, cfg.survivors)
        sel_cfg = SelectionConfig(
            n_survivors=cfg.survivors,
            restarts=cfg.selection_restarts,
            rng_seed=_derive_seed(cfg.rng_seed, f"select:{k}"),
        )
        result = approx_max(pool, sel_cfg, extra_starts=[warm])
        state.survivors = sorted(result.selected)
    return len(report.admitted), len(records) - len(report.admitted)


def _warm_start(previous: list[str], pool: list[tuple[str, CoverSet]], n: int) -> list[str]:
    """Previous survivors padded to n with the largest remaining covers.

    Greedy substitution never decreases an attempt's union, so seeding
    one attempt here is what makes the survivor union non-decreasing.
    """
    warm = list(previous)
    if len(warm) < n:
        cover_of = dict(pool)
        rest = sorted(
            (nid for nid in cover_of if nid not in set(warm)),
            key=lambda nid: (-len(cover_of[nid]), nid),
        )
        warm.extend(rest[: n - len(warm)])
    return warm[:n]


def _select_topk(
    state: EvolutionState,
    cfg: EvolutionConfig,
    records: list[MutantRecord],
    k: int,
) -> tuple[int, int]:
    """Ablation selection: top survivors by raw cover size, no lattice.

    The candidate pool is still previous survivors plus this iteration's
    valid mutants, but ranking by cardinality alone cannot see
    complementary covers, so the survivor union may shrink.
    """
    pool: list[tuple[str, CoverSet, str]] = [
        (nid, state.space.node(nid).cover, "old") for nid in state.survivors
    ]
    by_id = {r.id: r for r in records}
    pool.extend((r.id, r.outcome, "new") for r in records)
    pool.sort(key=lambda item: (-len(item[1]), item[0]))
    chosen = pool[: cfg.survivors]
    if len(pool) < cfg.survivors:
        logger.warning("pool of %d smaller than %d survivor slots", len(pool), cfg.survivors)

    admitted = 0
    for nid, _cover, origin in chosen:
        if origin == "new":
            record = by_id[nid]
            state.space.add_node(
                FuzzerNode(
                    id=record.id,
                    source=record.source,
                    provenance=record.provenance,
                    cover=record.outcome,
                    iteration_born=k,
                )
            )
            admitted += 1
    state.survivors = sorted(nid for nid, _, _ in chosen)
    return admitted, len(records) - admitted


# -- persistence --------------------------------------------------------------


def checkpoint_path(out_dir: Path, iteration: int) -> Path:
    return out_dir / f"state_{iteration:04d}.json"


def save_checkpoint(state: EvolutionState, cfg: EvolutionConfig, out_dir: Path) -> Path:
    path = checkpoint_path(out_dir, state.iteration)
    path.write_text(json.dumps(state.to_json_dict(cfg), indent=2) + "\n")
    return path


def load_latest_checkpoint(cfg: EvolutionConfig, out_dir: Path) -> EvolutionState:
    candidates = sorted(out_dir.glob("state_*.json"))
    if not candidates:
        raise CheckpointError(f"no checkpoints found in {out_dir}")
    obj = json.loads(candidates[-1].read_text())
    return EvolutionState.from_json_dict(obj, cfg)


def write_trend_csv(state: EvolutionState, path: Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TREND_COLUMNS)
    for row in state.trend:
        writer.writerow([getattr(row, col) for col in TREND_COLUMNS])
    path.write_text(buf.getvalue())


def export_fuzzers(state: EvolutionState, cfg: EvolutionConfig, out_dir: Path) -> Path:
    """Write the final survivors' sources plus the manifest."""
    entries = []
    for nid in sorted(state.survivors):
        node = state.space.node(nid)
        filename = f"fuzzer_{nid}.py"
        (out_dir / filename).write_text(node.source)
        entries.append(
            {
                "id": nid,
                "source_file": filename,
                "cover": node.cover.sorted_units(),
                "cover_size": len(node.cover),
            }
        )
    manifest = {
        "version": STATE_VERSION,
        "config_hash": cfg.config_hash(),
        "final_iteration": state.iteration,
        "survivor_union_size": len(state.survivor_union()),
        "survivors": entries,
    }
    path = out_dir / "fuzzers.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def run(
    cfg: EvolutionConfig,
    out_dir: Path,
    resume: bool = False,
    stop_after: int | None = None,
    backend=None,
) -> EvolutionState:
    """Full run: init (or resume), iterate, checkpoint, export."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if backend is None:
        backend = cfg.make_backend()
    if resume:
        state = load_latest_checkpoint(cfg, out_dir)
        logger.info("resumed from iteration %d", state.iteration)
    else:
        state = init(cfg)
        save_checkpoint(state, cfg, out_dir)
    last = cfg.iterations if stop_after is None else min(stop_after, cfg.iterations)
    while state.iteration < last:
        step(state, cfg, backend)
        save_checkpoint(state, cfg, out_dir)
        logger.info(
            "iteration %d: survivor union %d",
            state.iteration,
            state.trend[-1].survivor_union_size,
        )
    write_trend_csv(state, out_dir / "trend.csv")
    export_fuzzers(state, cfg, out_dir)
    return state


# -- corpus production and distillation ---------------------------------------


def produce(
    fuzzer_sources: list[tuple[str, str]],
    runner: RunnerConfig,
    out_dir: Path,
    count: int | None = None,
    duration: float | None = None,
    seed: int = 0,
    batch_size: int = 32,
) -> Path:
    """Round-robin the fuzzers into a corpus directory with a manifest.

    Exactly one of `count` / `duration` selects the stopping rule.
    Runner failures are logged per fuzzer and production continues with
    the rest.
    """
    if (count is None) == (duration is None):
        raise ValueError("exactly one of count or duration is required")
    if not fuzzer_sources:
        raise ValueError("no fuzzer sources to run")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    k = len(fuzzer_sources)
    manifest = []
    emitted = 0

    def emit(case: bytes, fuzzer_id: str, fuzzer_seed: int, index: int) -> None:
        nonlocal emitted
        name = f"{emitted:06d}.bin"
        (out_dir / name).write_bytes(case)
        manifest.append({"file": name, "fuzzer": fuzzer_id, "seed": fuzzer_seed, "index": index})
        emitted += 1

    if count is not None:
        shares = [count // k + (1 if i < count % k else 0) for i in range(k)]
        batches: list[list[bytes]] = []
        for i, (fid, source) in enumerate(fuzzer_sources):
            if shares[i] == 0:
                batches.append([])
                continue
            fuzzer_seed = _derive_seed(seed, f"produce:{fid}")
            outcome = run_candidate(source, runner, seed=fuzzer_seed, count=shares[i])
            if isinstance(outcome, ExecutionFailure):
                logger.warning("fuzzer %s failed during produce: %s", fid, outcome.detail)
                batches.append([])
            else:
                batches.append(outcome)
        for j in range(count):
            i = j % k
            index = j // k
            if index < len(batches[i]):
                emit(batches[i][index], fuzzer_sources[i][0],
                     _derive_seed(seed, f"produce:{fuzzer_sources[i][0]}"), index)
    else:
        deadline = time.monotonic() + duration
        round_no = 0
        while time.monotonic() < deadline:
            for i, (fid, source) in enumerate(fuzzer_sources):
                if time.monotonic() >= deadline:
                    break
                fuzzer_seed = _derive_seed(seed, f"produce:{fid}:{round_no}")
                outcome = run_candidate(source, runner, seed=fuzzer_seed, count=batch_size)
                if isinstance(outcome, ExecutionFailure):
                    logger.warning("fuzzer %s failed during produce: %s", fid, outcome.detail)
                    continue
                for index, case in enumerate(outcome):
                    emit(case, fid, fuzzer_seed, index)
            round_no += 1

    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return out_dir


def minimize(
    cases: list[tuple[str, bytes]],
    backend: CoverageBackend,
) -> list[tuple[str, bytes]]:
    """Greedy corpus distillation preserving the exact union coverage.

    Repeatedly keeps the case contributing the most new units, breaking
    ties by smaller size and then by name; cases adding nothing are
    dropped, so the result's union equals the input's union.
    """
    if not cases:
        raise ValueError("corpus is empty")
    measured = []
    for name, data in cases:
        measured.append((name, data, measure_cover([data], backend)))
    target = union_of(cover for _, _, cover in measured).units
    covered: frozenset[int] = frozenset()
    kept: list[tuple[str, bytes]] = []
    remaining = list(measured)
    while covered != target:
        best = min(
            remaining,
            key=lambda item: (-len(item[2].units - covered), len(item[1]), item[0]),
        )
        gain = best[2].units - covered
        # target is the union of all cases, so a positive-gain case exists
        assert gain
        kept.append((best[0], best[1]))
        covered |= best[2].units
        remaining.remove(best)
    return kept
