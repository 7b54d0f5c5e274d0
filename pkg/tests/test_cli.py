import json

import pytest

from conftest import runner_command
from fuzzsmith.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main, svg_line_chart

CONFIG_TEXT = f"""
[sut]
backend = toy
toy_name = balanced-parens
format_name = parens
format_hint = inputs are sequences of parentheses and asterisks

[runner]
command = {' '.join(runner_command())}
per_mutant_timeout = 20

[llm]
backend = mock
mock_seed = 7
invalid_rate = 0.1
mock_pool = parens

[evolution]
iterations = 2
mutants_per_iteration = 6
survivors = 2
rng_seed = 3
inputs_per_measurement = 150

[selection]
restarts = 5

[zest]
command = {' '.join(runner_command('--bytes', '{bytes_path}'))}
population = 2
budget = 8
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "engine.ini"
    path.write_text(CONFIG_TEXT)
    return path


def test_evolve_and_report_round_trip(config_path, tmp_path, capsys):
    out_dir = tmp_path / "run"
    assert main(["evolve", "--config", str(config_path), "--out-dir", str(out_dir)]) == EXIT_OK
    trend = (out_dir / "trend.csv").read_text().splitlines()
    assert len(trend) == 3  # header + 2 iterations
    capsys.readouterr()

    assert main(["report", str(out_dir)]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert "survivor_union_size" in lines[0]
    values = [int(line.split()[1]) for line in lines[1:3]]
    assert values == sorted(values)

    assert main(["report", str(out_dir), "--plot"]) == EXIT_OK
    svg = (out_dir / "trend.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg


def test_evolve_malformed_config_names_key(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text(CONFIG_TEXT.replace("mutants_per_iteration = 6", "mutnts = 6"))
    code = main(["evolve", "--config", str(bad), "--out-dir", str(tmp_path / "x")])
    assert code == EXIT_CONFIG
    assert "mutnts" in capsys.readouterr().err


def test_resume_with_mismatched_config(config_path, tmp_path, capsys):
    out_dir = tmp_path / "run"
    assert main(["evolve", "--config", str(config_path), "--out-dir", str(out_dir)]) == EXIT_OK
    changed = tmp_path / "changed.ini"
    changed.write_text(CONFIG_TEXT.replace("rng_seed = 3", "rng_seed = 4"))
    code = main(["evolve", "--config", str(changed), "--out-dir", str(out_dir), "--resume"])
    assert code == EXIT_CONFIG
    assert "config hash mismatch" in capsys.readouterr().err


def test_report_on_empty_dir(tmp_path, capsys):
    assert main(["report", str(tmp_path)]) == EXIT_RUNTIME
    assert "trend.csv" in capsys.readouterr().err


def test_produce_and_minimize_subcommands(config_path, tmp_path, capsys):
    out_dir = tmp_path / "run"
    assert main(["evolve", "--config", str(config_path), "--out-dir", str(out_dir)]) == EXIT_OK
    corpus = tmp_path / "corpus"
    assert (
        main(
            [
                "produce",
                "--config",
                str(config_path),
                "--run-dir",
                str(out_dir),
                "--out-dir",
                str(corpus),
                "--count",
                "12",
            ]
        )
        == EXIT_OK
    )
    cases = [p for p in corpus.iterdir() if p.suffix == ".bin"]
    assert len(cases) == 12

    reduced = tmp_path / "reduced"
    assert (
        main(
            [
                "minimize",
                "--config",
                str(config_path),
                "--corpus",
                str(corpus),
                "--out-dir",
                str(reduced),
            ]
        )
        == EXIT_OK
    )
    report = json.loads((reduced / "minimize_report.json").read_text())
    assert report["kept"] <= report["original"]


def test_zest_subcommand(config_path, tmp_path):
    fuzzer = tmp_path / "gen.py"
    fuzzer.write_text(
        "def gen_parens(rng, output):\n"
        "    for _ in range(rng.randint(0, 4)):\n"
        "        output.write('()')\n"
    )
    out_dir = tmp_path / "zcorpus"
    code = main(
        [
            "zest",
            "--config",
            str(config_path),
            "--fuzzer",
            str(fuzzer),
            "--out-dir",
            str(out_dir),
            "--budget",
            "6",
            "--seed",
            "1",
        ]
    )
    assert code == EXIT_OK
    assert (out_dir / "manifest.json").is_file()


def test_svg_chart_handles_flat_series():
    svg = svg_line_chart([5, 5, 5])
    assert svg.count("polyline") == 1
