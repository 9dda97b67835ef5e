import json
import subprocess
import sys

import pytest

from singsys import parse
from singsys.cli import main

from conftest import PROBLEMS

FIXTURE_FILES = ["ex_a.ini", "ex_b.ini", "ex_c.ini", "ex_r.ini"]


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "singsys", *map(str, args)],
                          capture_output=True, text=True)


def test_analyze_ex_b(tmp_path):
    out = tmp_path / "b.json"
    r = run_cli("analyze", PROBLEMS / "ex_b.ini", "--json", out)
    assert r.returncode == 0, r.stderr
    assert r.stderr == ""
    assert "p2 - q1    [hamiltonian, gen 1, primary, second]" in r.stdout
    assert "p1    [hamiltonian, gen 2, tangency, second]" in r.stdout
    assert "v1    [lagrangian, gen 2, dynamical, unknown]" in r.stdout
    assert "v2    [lagrangian, gen 3, sode, unknown]" in r.stdout
    assert "generation k+1" in r.stdout
    rep = json.loads(out.read_text())
    assert rep["k_operator"]["pdot"] == ["v2", "0"]
    assert rep["generation_shift"]["holds"] is True
    assert rep["canonical"]["valence"] == "2"
    assert rep["outcome"] == {"status": "ok", "exit_code": 0, "message": None}


def test_validate_rejects_cubic(tmp_path):
    f = tmp_path / "cubic.ini"
    f.write_text("[system]\ndim = 1\nlagrangian = v1^3\n")
    r = run_cli("validate", f)
    assert r.returncode == 2
    assert "not quadratic in velocities" in r.stderr


def test_inconsistent_presymplectic_exits_3():
    r = run_cli("analyze", PROBLEMS / "inconsistent.ini")
    assert r.returncode == 3
    assert "nonzero constant" in r.stderr


@pytest.mark.parametrize("text, fragment", [
    ("[system]\ndim = 2\nlagrangian = v1 +* v2\n", "line 1"),
    ("[system]\ndim = 1\nlagrangian = v1^2 + q2\n", "unknown identifier 'q2'"),
    ("[system]\ndim = two\nlagrangian = v1^2\n", "must be an integer"),
    ("[systme]\ndim = 1\n", "unknown section"),
    ("just text", "error"),
])
def test_input_errors_exit_2(tmp_path, capsys, text, fragment):
    f = tmp_path / "bad.ini"
    f.write_text(text)
    assert main(["analyze", str(f)]) == 2
    assert fragment in capsys.readouterr().err


def test_missing_file_exits_2(capsys):
    assert main(["validate", "no/such/file.ini"]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_unstabilized_exits_4(capsys):
    assert main(["hamiltonian", str(PROBLEMS / "ex_b.ini"), "--max-generations", "1"]) == 4
    captured = capsys.readouterr()
    assert "max_generations = 1" in captured.err
    assert "status: unstabilized" in captured.out


def test_canonical_check_requires_transformation(capsys):
    assert main(["canonical-check", str(PROBLEMS / "ex_c.ini")]) == 2
    assert main(["canonical-check", str(PROBLEMS / "ex_a.ini")]) == 0
    assert "valence: 2" in capsys.readouterr().out


@pytest.mark.parametrize("command", ["hamiltonian", "lagrangian", "k-check", "validate"])
def test_each_command_runs(command, capsys):
    assert main([command, str(PROBLEMS / "ex_c.ini")]) == 0
    out = capsys.readouterr().out
    assert "== outcome ==" in out


@pytest.mark.parametrize("name", FIXTURE_FILES)
def test_byte_determinism(tmp_path, name):
    outs = []
    for i in range(2):
        js = tmp_path / f"{i}.json"
        r = run_cli("analyze", PROBLEMS / name, "--seed", 0, "--json", js)
        assert r.returncode == 0
        outs.append((r.stdout, js.read_bytes()))
    assert outs[0] == outs[1]


def _constraint_strings(rep):
    found = []
    for key in ("hamiltonian",):
        for g in rep[key]["generations"]:
            found += [c["expr"] for c in g["constraints"]]
    for side in ("with_sode", "without_sode"):
        for g in rep["lagrangian"][side]["generations"]:
            found += [c["expr"] for c in g["constraints"]]
    return found


@pytest.mark.parametrize("name", FIXTURE_FILES)
def test_json_and_text_agree(tmp_path, name):
    js = tmp_path / "r.json"
    r = run_cli("analyze", PROBLEMS / name, "--json", js)
    rep = json.loads(js.read_text())
    for s in _constraint_strings(rep):
        assert str(parse(s)) == s
        assert s + "    [" in r.stdout


def test_several_files_with_jobs(tmp_path):
    js = tmp_path / "all.json"
    files = [PROBLEMS / f for f in FIXTURE_FILES]
    r = run_cli("analyze", *files, "--jobs", 2, "--json", js)
    assert r.returncode == 0
    reps = json.loads(js.read_text())
    assert [rep["input"]["file"] for rep in reps] == [str(f) for f in files]
    single = run_cli("analyze", *files)
    assert single.stdout == r.stdout


def test_worst_exit_code_wins():
    r = run_cli("analyze", PROBLEMS / "ex_a.ini", PROBLEMS / "inconsistent.ini")
    assert r.returncode == 3


def test_engine_section_and_override(tmp_path, capsys):
    f = tmp_path / "e.ini"
    f.write_text((PROBLEMS / "ex_c.ini").read_text() + "\n[engine]\ntrials = 7\nseed = 3\n")
    assert main(["validate", str(f), "--seed", "5"]) == 0
    out = capsys.readouterr().out
    assert "trials: 7" in out and "seed: 5" in out
