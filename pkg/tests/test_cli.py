import json
import subprocess
import sys
from pathlib import Path

import pytest

from chiralforge.cli import UsageError, main, parse_group

SPECS = Path(__file__).resolve().parents[1] / "specs"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def strip_timing(x):
    if isinstance(x, dict):
        return {k: strip_timing(v) for k, v in x.items() if k != "elapsed_s"}
    if isinstance(x, list):
        return [strip_timing(v) for v in x]
    return x


@pytest.mark.parametrize("argv", [
    ("verify", "heisenberg", "--cutoff", "4", "--m-range", "3"),
    ("verify", "braiding", "--alpha", "1/2", "--beta", "1/2", "--cutoff", "2"),
    ("verify", "gram", "--cutoff", "5"),
    ("verify", "energy", "--cutoff", "4"),
    ("verify", "chain", "--cutoff", "4", "--k-max", "2"),
    ("sectors", "check-1d", "--spec", str(SPECS / "even_lattice.json")),
    ("sectors", "check-2d", "--spec", str(SPECS / "u1_conjugate.json")),
    ("sectors", "lr", "--spec", str(SPECS / "z2_boson.json")),
    ("sectors", "shift-fields", "--group", "Z2xZ3"),
    ("twodim", "locality", "--cutoff", "2"),
    ("twodim", "smear", "--cutoff", "3"),
])
def test_passing_commands_exit_zero(capsys, argv):
    code, rep = run(capsys, *argv)
    assert code == 0 and rep["status"] == "pass"
    assert rep["schema_version"] == 1


@pytest.mark.parametrize("argv", [
    ("verify", "braiding", "--cutoff", "2", "--mutate", "eplus-sign"),
    ("sectors", "check-1d", "--spec", str(SPECS / "fermion.json")),
    ("sectors", "check-2d", "--spec", str(SPECS / "u1_half_same.json"), "--pairing", "same-sign"),
    ("sectors", "lr", "--spec", str(SPECS / "z2_odd_explicit.json"), "--single-leg"),
    ("twodim", "locality", "--alpha", "1/2", "--cutoff", "2", "--pairing", "same-sign"),
])
def test_failing_checks_exit_one(capsys, argv):
    code, rep = run(capsys, *argv)
    assert code == 1 and rep["status"] == "fail"


@pytest.mark.parametrize("argv", [
    (),
    ("verify", "nonsense"),
    ("verify", "braiding", "--alpha", "x"),
    ("verify", "braiding", "--mutate", "no-such-bug"),
    ("verify", "gram", "--cutoff", "-1"),
    ("verify", "chain", "--k-max", "5", "--cutoff", "2"),
    ("sectors", "lr"),
    ("sectors", "lr", "--spec", "/nonexistent.json"),
    ("sectors", "lr", "--spec", str(SPECS / "fermion.json")),
    ("sectors", "check-2d", "--spec", str(SPECS / "fermion.json")),
    ("sectors", "shift-fields", "--group", "Q"),
    ("verify", "heisenberg", "--jobs", "0"),
])
def test_usage_errors_exit_two(capsys, argv):
    assert main(list(argv)) == 2


def test_reports_are_deterministic_apart_from_timing(capsys):
    argv = ("verify", "energy", "--cutoff", "4", "--seed", "3")
    _, first = run(capsys, *argv)
    _, second = run(capsys, *argv)
    assert strip_timing(first) == strip_timing(second)
    assert first["seed"] == 3


def test_out_file(tmp_path, capsys):
    out = tmp_path / "reports" / "gram.json"
    assert main(["verify", "gram", "--cutoff", "4", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["suite"] == "gram"


def test_cache_dir_flag(tmp_path, capsys):
    cache = tmp_path / "modes"
    assert main(["verify", "energy", "--cutoff", "3", "--cache-dir", str(cache)]) == 0
    assert any(p.name.startswith("mode-") for p in cache.iterdir())


def test_parse_group():
    g = parse_group("ZxZ2xZ3")
    assert (g.free_rank, g.torsion) == (1, (2, 3))
    with pytest.raises(UsageError):
        parse_group("Z0.5")


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "chiralforge", "verify", "gram", "--cutoff", "3"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "pass"


@pytest.mark.slow
def test_demo_parallel_matches_serial(tmp_path):
    serial, parallel = tmp_path / "s.json", tmp_path / "p.json"
    assert main(["demo", "--cutoff", "2", "--out", str(serial)]) == 0
    assert main(["demo", "--cutoff", "2", "--jobs", "2", "--out", str(parallel)]) == 0
    a, b = json.loads(serial.read_text()), json.loads(parallel.read_text())
    assert strip_timing(a) == strip_timing(b)
