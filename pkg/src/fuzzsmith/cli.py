"""Command-line front end: evolve, produce, minimize, zest, report.

Configuration lives in the config file; flags carry only paths, the
resume switch, and one-for-one overrides.  Exit codes: 0 success,
1 runtime failure, 2 configuration problem, 3 seed-initialization
failure.  The ELFZ_LOG environment variable sets the log level.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

from . import evolution
from .config import ConfigError, load_config
from .evolution import CheckpointError, SeedInitError
from .harness import HarnessError
from .llm import LlmConfig
from .zest import zest_loop

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_SEED_INIT = 3


def _setup_logging() -> None:
    level_name = os.environ.get("ELFZ_LOG", "WARNING").upper()
    level = getattr(logging, level_name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _load_setup(config_path: str):
    try:
        return load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG) from exc


def cmd_evolve(args) -> int:
    setup = _load_setup(args.config)
    cfg = setup.evolution
    if args.log_llm and isinstance(cfg.llm, LlmConfig):
        cfg = dataclasses.replace(cfg, llm=dataclasses.replace(cfg.llm, log_bodies=True))
    try:
        state = evolution.run(cfg, Path(args.out_dir), resume=args.resume)
    except CheckpointError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SeedInitError as exc:
        print(f"seed initialization failed: {exc}", file=sys.stderr)
        return EXIT_SEED_INIT
    except OSError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(
        f"done: {state.iteration} iterations, "
        f"survivor union {len(state.survivor_union())} units, "
        f"outputs in {args.out_dir}"
    )
    return EXIT_OK


def cmd_produce(args) -> int:
    setup = _load_setup(args.config)
    run_dir = Path(args.run_dir)
    manifest_path = run_dir / "fuzzers.json"
    if not manifest_path.is_file():
        print(f"no fuzzers.json in {run_dir}", file=sys.stderr)
        return EXIT_RUNTIME
    manifest = json.loads(manifest_path.read_text())
    sources = [
        (entry["id"], (run_dir / entry["source_file"]).read_text())
        for entry in manifest["survivors"]
    ]
    try:
        evolution.produce(
            sources,
            setup.evolution.runner,
            Path(args.out_dir),
            count=args.count,
            duration=args.duration,
            seed=args.seed,
        )
    except (ValueError, OSError) as exc:
        print(f"produce failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"corpus written to {args.out_dir}")
    return EXIT_OK


def cmd_minimize(args) -> int:
    setup = _load_setup(args.config)
    corpus_dir = Path(args.corpus)
    cases = sorted(p for p in corpus_dir.iterdir() if p.is_file() and p.suffix == ".bin")
    if not cases:
        print(f"no .bin test cases in {corpus_dir}", file=sys.stderr)
        return EXIT_RUNTIME
    named = [(p.name, p.read_bytes()) for p in cases]
    try:
        kept = evolution.minimize(named, setup.evolution.sut)
    except HarnessError as exc:
        print(f"minimize aborted: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, data in kept:
        (out_dir / name).write_bytes(data)
    report = {"original": len(named), "kept": len(kept), "files": [name for name, _ in kept]}
    (out_dir / "minimize_report.json").write_text(json.dumps(report, indent=2) + "\n")
    print(f"kept {len(kept)} of {len(named)} cases in {out_dir}")
    return EXIT_OK


def cmd_zest(args) -> int:
    setup = _load_setup(args.config)
    try:
        cfg = setup.zest_config()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.population is not None:
        cfg = dataclasses.replace(cfg, population=args.population)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, rng_seed=args.seed)
    budget = args.budget if args.budget is not None else setup.zest_budget
    source = Path(args.fuzzer).read_text()
    try:
        result = zest_loop(source, cfg, budget)
    except (RuntimeError, ValueError) as exc:
        print(f"zest failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = []
    for i, case in enumerate(result.corpus):
        name = f"{i:06d}.bin"
        (out_dir / name).write_bytes(case)
        manifest.append({"file": name, "index": i})
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    final = result.union_sizes[-1] if result.union_sizes else 0
    print(f"zest: {budget} rounds, final union {final} units, corpus in {out_dir}")
    return EXIT_OK


def _read_trend(path: Path) -> list[dict]:
    import csv

    with path.open() as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError("trend file has no rows")
    for row in rows:
        if row.get("survivor_union_size") is None:
            raise ValueError("trend file is missing the survivor_union_size column")
    return rows


def svg_line_chart(values: list[int], width: int = 640, height: int = 320) -> str:
    """Minimal SVG polyline chart; no plotting stack required."""
    margin = 40
    top = max(values) if values else 1
    top = max(top, 1)
    n = max(len(values) - 1, 1)
    points = []
    for i, v in enumerate(values):
        x = margin + i * (width - 2 * margin) / n
        y = height - margin - v * (height - 2 * margin) / top
        points.append(f"{x:.1f},{y:.1f}")
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'  <rect width="{width}" height="{height}" fill="white"/>\n'
        f'  <line x1="{margin}" y1="{height - margin}" x2="{width - margin}"'
        f' y2="{height - margin}" stroke="black"/>\n'
        f'  <line x1="{margin}" y1="{margin}" x2="{margin}"'
        f' y2="{height - margin}" stroke="black"/>\n'
        f'  <text x="{margin}" y="{margin - 10}" font-size="12">{top}</text>\n'
        f'  <text x="{width - margin}" y="{height - margin + 20}" font-size="12"'
        f' text-anchor="end">{len(values)}</text>\n'
        f'  <polyline fill="none" stroke="steelblue" stroke-width="2"'
        f' points="{" ".join(points)}"/>\n'
        f"</svg>\n"
    )


def cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    trend_path = run_dir / "trend.csv"
    if not trend_path.is_file():
        print(f"no trend.csv in {run_dir}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        rows = _read_trend(trend_path)
    except (ValueError, KeyError) as exc:
        print(f"corrupt trend file: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"{'iteration':>9}  {'survivor_union_size':>19}")
    for row in rows:
        print(f"{row['iteration']:>9}  {row['survivor_union_size']:>19}")
    if args.plot:
        values = [int(row["survivor_union_size"]) for row in rows]
        svg_path = run_dir / "trend.svg"
        svg_path.write_text(svg_line_chart(values))
        print(f"plot written to {svg_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fuzzsmith")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="run the evolution loop")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--log-llm", action="store_true", help="log request/response bodies")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("produce", help="emit a corpus from exported fuzzers")
    p.add_argument("--config", required=True)
    p.add_argument("--run-dir", required=True)
    p.add_argument("--out-dir", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--count", type=int)
    group.add_argument("--duration", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_produce)

    p = sub.add_parser("minimize", help="distill a corpus preserving union coverage")
    p.add_argument("--config", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("zest", help="evolve byte arrays for one fuzzer")
    p.add_argument("--config", required=True)
    p.add_argument("--fuzzer", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--population", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_zest)

    p = sub.add_parser("report", help="print the per-iteration trend")
    p.add_argument("run_dir")
    p.add_argument("--plot", action="store_true", help="also write an SVG chart")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_RUNTIME
    except Exception as exc:  # final safety net maps to the runtime exit code
        logger.exception("unhandled error")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
