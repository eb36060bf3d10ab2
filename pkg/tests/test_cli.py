"""End-to-end command tests through click's runner."""

import csv
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from ctpverify.cli import main
from ctpverify.frontend import parse

RACY = """\
shared r = 8
property always (r <= 8)
process P {
  0 -> 1 : [true] r := r - 1 ;
}
process Q {
  0 -> 1 : [true] r := r + 1 ;
}
"""


@pytest.fixture
def runner():
    return CliRunner()


def write_cc(runner_fs_path="cc.ctp"):
    runner = CliRunner()
    result = runner.invoke(main, ["gen", "cc", "1", "-o", runner_fs_path])
    assert result.exit_code == 0
    return runner_fs_path


def test_verify_si_json(runner, tmp_path):
    with runner.isolated_filesystem(temp_dir=tmp_path):
        path = write_cc()
        result = runner.invoke(main, ["verify", path, "--mode", "si", "--json"])
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["verdict"] == "SAFE"
        assert payload["states_visited"] == 9
        assert payload["states_subsumed"] == 4
        assert "counterexample" not in payload


def test_verify_human_output(runner, tmp_path):
    with runner.isolated_filesystem(temp_dir=tmp_path):
        path = write_cc()
        result = runner.invoke(main, ["verify", path, "--mode", "pdpor-si"])
        assert result.exit_code == 0
        assert "verdict: SAFE" in result.output
        assert "states visited: 5" in result.output


def test_verify_unsafe_exit_and_counterexample(runner, tmp_path):
    with runner.isolated_filesystem(temp_dir=tmp_path):
        with open("race.ctp", "w") as fh:
            fh.write(RACY)
        result = runner.invoke(main, ["verify", "race.ctp", "--mode", "exhaustive",
                                      "--json"])
        assert result.exit_code == 1
        payload = json.loads(result.output)
        assert payload["verdict"] == "UNSAFE"
        assert payload["counterexample"]["trace"] == [1]
        assert payload["counterexample"]["witness"] == {}


def test_verify_parse_error_exits_2(runner, tmp_path):
    with runner.isolated_filesystem(temp_dir=tmp_path):
        with open("bad.ctp", "w") as fh:
            fh.write("shared x = 0\nwat\n")
        result = runner.invoke(main, ["verify", "bad.ctp"])
        assert result.exit_code == 2
        assert "expected a declaration" in result.output


def test_verify_timeout_exits_2(runner, tmp_path):
    with runner.isolated_filesystem(temp_dir=tmp_path):
        result = runner.invoke(main, ["gen", "pc", "2", "-o", "pc2.ctp"])
        assert result.exit_code == 0
        result = runner.invoke(main, ["verify", "pc2.ctp", "--mode", "exhaustive",
                                      "--timeout", "0"])
        assert result.exit_code == 2


def test_verify_dump_persistent(runner, tmp_path):
    with runner.isolated_filesystem(temp_dir=tmp_path):
        path = write_cc()
        result = runner.invoke(main, ["verify", path, "--mode", "pdpor-si",
                                      "--dump-persistent"])
        assert result.exit_code == 0
        assert "(0, 0) -> T={0}" in result.output


def test_verify_seed_order_flag(runner, tmp_path):
    with runner.isolated_filesystem(temp_dir=tmp_path):
        path = write_cc()
        result = runner.invoke(main, ["verify", path, "--mode", "pdpor-si",
                                      "--seed-order", "3,2,1,0", "--json"])
        assert result.exit_code == 0
        assert json.loads(result.output)["states_visited"] == 9
        result = runner.invoke(main, ["verify", path, "--seed-order", "1,2"])
        assert result.exit_code == 2


def test_gen_round_trips(runner, tmp_path):
    with runner.isolated_filesystem(temp_dir=tmp_path):
        result = runner.invoke(main, ["gen", "sum", "6"])
        assert result.exit_code == 0
        program = parse(result.output)
        assert len(program.processes) == 6


def test_gen_pc_process_count(runner):
    result = runner.invoke(main, ["gen", "pc", "2"])
    assert result.exit_code == 0
    assert result.output.count("process ") == 5


def test_gen_rejects_small_philosophers(runner):
    result = runner.invoke(main, ["gen", "phil", "1"])
    assert result.exit_code == 2


def test_bench_csv_and_figures(runner, tmp_path):
    with runner.isolated_filesystem(temp_dir=tmp_path):
        result = runner.invoke(main, ["bench", "--families", "sum", "--sizes", "2,3",
                                      "--modes", "si,pdpor-si", "-o", "t.csv"])
        assert result.exit_code == 0, result.output
        with open("t.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 4
        got = {(r["family"], r["n"], r["mode"]): r for r in rows}
        assert got[("sum", "3", "pdpor-si")]["states_visited"] == "4"
        assert all(r["verdict"] == "SAFE" for r in rows)
        assert Path("sum_states.png").exists()


def test_bench_timeout_renders_dashes(runner, tmp_path):
    with runner.isolated_filesystem(temp_dir=tmp_path):
        result = runner.invoke(main, ["bench", "--families", "pc", "--sizes", "2",
                                      "--modes", "exhaustive", "--timeout", "0.05",
                                      "-o", "t.csv", "--no-plot"])
        assert result.exit_code == 0
        with open("t.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert rows[0]["verdict"] == "RESOURCE_LIMIT"
        assert rows[0]["states_visited"] == "-"
        assert rows[0]["time_ms"] == "-"


def test_bench_rejects_empty_modes(runner):
    result = runner.invoke(main, ["bench", "--modes", " "])
    assert result.exit_code == 2
