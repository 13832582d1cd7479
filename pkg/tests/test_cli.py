import json
import subprocess
import sys

import pytest

from cotlar import cli, suites
from cotlar.errors import CotlarError
from cotlar.suites import RunOptions, SuiteResult


def run_cli(args, tmp_path):
    return cli.main([*args, "--out", str(tmp_path)])


def test_constants_subcommand_writes_reports(tmp_path, capsys):
    assert run_cli(["constants", "--p", "4", "--d", "3"], tmp_path) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["schema"] == cli.SCHEMA and manifest["pass"] and manifest["first_failure"] is None
    assert manifest["subcommand"] == "constants" and manifest["seed"] == cli.DEFAULT_SEED
    assert manifest["config"]["p"] == [4.0] and manifest["config"]["d"] == [3]
    assert {"suite", "name", "pass", "gate"} <= set(manifest["checks"][0])
    s = manifest["summary"]
    assert s["checks"] == s["gates"] + s["references"] and s["failed_gates"] == 0
    csv_text = (tmp_path / "constants" / "constants.csv").read_text()
    assert "pichorides,4.0,,2.414213562373095" in csv_text
    assert "constants" in json.loads((tmp_path / "timings.json").read_text())
    out = capsys.readouterr().out
    assert "gates passed" in out and "PASS     constants/" in out


def test_plot_flag_writes_svg(tmp_path):
    assert run_cli(["constants", "--plot", "--p", "2,4"], tmp_path) == 0
    svg = (tmp_path / "constants" / "h_function.svg").read_text()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")


def test_manifest_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli(["matrices", "--seed", "0x10"], a) == 0
    assert run_cli(["matrices", "--seed", "16", "--jobs", "2"], b) == 0
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()


def test_failing_gate_exits_one(tmp_path, monkeypatch, capsys):
    def fake(name, opts):
        res = SuiteResult(name)
        res.add("fine", True)
        res.add("optional", False, gate=False)
        res.add("broken", False, value=1.5)
        return res

    monkeypatch.setattr(cli, "run_suite", fake)
    assert cli.run("constants", RunOptions(), tmp_path, stream=sys.stdout) == 1
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["first_failure"] == "constants/broken" and not manifest["pass"]
    assert manifest["summary"]["failed_references"] == 1
    out = capsys.readouterr().out
    assert "ref-miss" in out and "first failing check: constants/broken" in out


def test_reference_miss_alone_keeps_exit_zero(tmp_path, monkeypatch):
    def fake(name, opts):
        res = SuiteResult(name)
        res.add("optional", False, gate=False)
        return res

    monkeypatch.setattr(cli, "run_suite", fake)
    assert cli.run("constants", RunOptions(), tmp_path) == 0


@pytest.mark.parametrize("args", [
    ["nonsense"],
    ["constants", "--seed", "-1"],
    ["constants", "--seed", str(2**64)],
    ["constants", "--beta", "1.0"],
    ["constants", "--grid", "100"],
    ["constants", "--grid", "4"],
    ["constants", "--p", "two"],
    ["constants", "--p=-1"],
    ["constants", "--d", "0"],
    ["constants", "--paths", "0"],
    ["constants", "--dt", "-1"],
])
def test_usage_errors_exit_two(args, tmp_path):
    with pytest.raises(SystemExit) as exc:
        run_cli(args, tmp_path)
    assert exc.value.code == 2


def test_library_errors_exit_two(tmp_path, monkeypatch, capsys):
    def fake(name, opts):
        raise CotlarError("grid too coarse")

    monkeypatch.setattr(cli, "run_suite", fake)
    assert run_cli(["constants"], tmp_path) == 2
    assert "cotlar: error:" in capsys.readouterr().err


def test_out_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("COTLAR_OUT", str(tmp_path / "env"))
    assert cli.main(["matrices"]) == 0
    assert (tmp_path / "env" / "manifest.json").exists()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "cotlar", "matrices", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "gates passed" in proc.stdout


def test_suite_names():
    assert cli.build_parser().parse_args(["all"]).subcommand == "all"
    assert set(suites.SUITES) == {"constants", "matrices", "operators", "simulate", "exitlaw", "norms"}
