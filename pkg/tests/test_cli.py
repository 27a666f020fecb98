import csv
import io
import json
import subprocess
import sys

import pytest

from holonomy_lab import cli


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_quick_passes(capsys, tmp_path):
    path = tmp_path / "calabi.json"
    code, out, _ = run(["verify", "calabi", "--n", "1", "--quick", "--out", str(path)], capsys)
    assert code == cli.EXIT_PASS
    assert out.strip().splitlines()[-1].startswith("PASS")
    payload = json.loads(path.read_text())
    assert payload["kind"] == "verify" and payload["passed"]
    assert run(["report", str(path)], capsys)[0] == cli.EXIT_PASS


def test_verify_bryant_salamon_accepts_any_case(capsys):
    code, _, _ = run(["verify", "bs", "--space", "ASD_s4", "--kappa", "2", "--quick"], capsys)
    assert code == cli.EXIT_PASS


def test_flat_stenzel_dimension_is_a_usage_error(capsys):
    code, _, err = run(["verify", "stenzel", "--n", "1", "--quick"], capsys)
    assert code == cli.EXIT_USAGE
    assert "n > 1 required" in err


@pytest.mark.parametrize("argv", [
    ["verify"],
    ["verify", "hyperbolic"],
    ["verify", "bs", "--quick"],
    ["verify", "bs", "--space", "asd_S4", "--kappa", "-1", "--quick"],
    ["sweep", "stenzel", "relation"],
    ["sweep", "stenzel", "volume"],
    ["sweep", "stenzel", "abc", "--grid", "0:1:x"],
    ["sweep", "stenzel", "abc", "--grid", "0.5:1.5:10"],
    ["flow", "--n", "3"],
    ["flow", "--eps", "5", "--mesh-level", "1"],
    ["frobnicate"],
])
def test_usage_errors_exit_with_two(argv, capsys):
    assert run(argv, capsys)[0] == cli.EXIT_USAGE


def test_abc_sweep_csv(capsys):
    code, out, _ = run(["sweep", "stenzel", "abc", "--n", "3"], capsys)
    assert code == cli.EXIT_PASS
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][:5] == ["rho", "r", "A", "B", "C"]
    assert len(rows) == 201


def test_calabi_hessian_sweep_has_positive_minimum(capsys):
    code, out, _ = run(["sweep", "calabi", "hessian", "--n", "2", "--grid", "0.01:2:50"], capsys)
    assert code == cli.EXIT_PASS
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 50
    assert all(float(row["min_eigenvalue"]) > 0 for row in rows)


def test_relation_sweep_to_file(capsys, tmp_path):
    path = tmp_path / "relation.csv"
    code, _, _ = run(["sweep", "bs", "relation", "--space", "spinor_S3", "--grid", "0:5:20", "--out", str(path)], capsys)
    assert code == cli.EXIT_PASS
    rows = list(csv.DictReader(path.open()))
    assert max(float(row["ratio_residual"]) for row in rows) < 1e-12


def test_config_file_is_merged_and_flags_win(capsys, tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text("# sweep settings\nfamily = stenzel\nquantity = abc\nn = 3\ngrid = 1e-3:0.9:7\n")
    code, out, _ = run(["sweep", "--config", str(config), "--grid", "1e-3:0.9:5"], capsys)
    assert code == cli.EXIT_PASS
    assert len(out.strip().splitlines()) == 6


@pytest.mark.parametrize("text", ["colour = red\n", "n = three\n", "just words\n"])
def test_config_rejects_bad_lines(text, tmp_path, capsys):
    config = tmp_path / "bad.cfg"
    config.write_text(text)
    with pytest.raises(cli.UsageError):
        cli.read_config(str(config))
    assert run(["verify", "--config", str(config)], capsys)[0] == cli.EXIT_USAGE


def test_config_boolean_values(tmp_path):
    config = tmp_path / "ok.cfg"
    config.write_text("quick = yes\nfd-step = 1e-5\n")
    assert cli.read_config(str(config)) == {"quick": True, "fd_step": 1e-5}


def test_flow_writes_csv_and_json(capsys, tmp_path):
    prefix = tmp_path / "short"
    code, out, _ = run(["flow", "--mesh-level", "1", "--t-end", "0.05", "--out", str(prefix)], capsys)
    assert code in (cli.EXIT_PASS, cli.EXIT_FAIL)
    assert "terminal psi_max" in out
    header = (tmp_path / "short.csv").read_text().splitlines()[0]
    assert header == "step,t,psi_max,star_omega_min,stability_min,A2_max,volume"
    payload = json.loads((tmp_path / "short.json").read_text())
    assert payload["kind"] == "flow"
    assert run(["report", str(tmp_path / "short.json")], capsys)[0] == code


def test_euclidean_flow_validation(capsys):
    code, out, _ = run(["flow", "--family", "euclidean", "--mesh-level", "2", "--t-end", "0.05"], capsys)
    assert code == cli.EXIT_PASS
    assert "shrinking sphere" in out


def test_report_rejects_unknown_payload(capsys, tmp_path):
    path = tmp_path / "other.json"
    path.write_text(json.dumps({"kind": "other"}))
    assert run(["report", str(path)], capsys)[0] == cli.EXIT_USAGE
    assert run(["report", str(tmp_path / "missing.json")], capsys)[0] == cli.EXIT_USAGE


def test_help_exits_cleanly(capsys):
    code, out, _ = run(["sweep", "--help"], capsys)
    assert code == cli.EXIT_PASS
    assert "CSV columns" in out


def test_thread_cap_is_copied():
    environ = {"HOLONOMY_LAB_THREADS": "2"}
    cli.apply_thread_cap(environ)
    assert all(environ[name] == "2" for name in cli.THREAD_VARIABLES)
    with pytest.raises(cli.UsageError):
        cli.apply_thread_cap({"HOLONOMY_LAB_THREADS": "zero"})
    untouched = {}
    cli.apply_thread_cap(untouched)
    assert untouched == {}


@pytest.mark.parametrize("text,count,first,last", [(None, 100, 0.0, 1.0), ("7", 7, 0.0, 1.0), ("0.5:2:4", 4, 0.5, 2.0)])
def test_parse_grid(text, count, first, last):
    grid = cli.parse_grid(text, (0.0, 1.0))
    assert grid.size == count and grid[0] == first and grid[-1] == last


def test_module_entry_point():
    result = subprocess.run([sys.executable, "-m", "holonomy_lab", "verify", "stenzel", "--n", "1"], capture_output=True, text=True)
    assert result.returncode == cli.EXIT_USAGE
    assert "n > 1 required" in result.stderr
