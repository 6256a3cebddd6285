from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from lemniscate.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


class TestGenerate:
    def test_fig8(self, capsys):
        code, d = run_json(capsys, "generate", "--s", "3", "--r", "2", "--l", "2")
        assert code == 0 and d["clearing"] == 64 and d["name"] == "4_1"
        terms = {(t["eu"], t["ev"], t["evb"]): (t["re"][0], t["im"][0]) for t in d["field"]}
        assert terms[(3, 0, 0)] == (64, 0) and terms[(1, 2, 0)] == (-24, 0) and terms[(0, 0, 4)] == (1, 0)
        assert all(t["re"][1] == 1 for t in d["field"])
        assert d["spatial"]["denominator_power"] == 4

    def test_torus(self, capsys):
        code, out, _ = run(capsys, "generate", "--s", "2", "--r", "3", "--l", "1", "--format", "text")
        assert code == 0 and out.strip() == "1*u^2 + -1*v^3"

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "generate", "--preset", "cable-13n4587", "--format", "csv")
        rows = list(csv.reader(out.splitlines()))
        assert code == 0 and rows[0] == ["eu", "ev", "evb", "re", "im"] and len(rows) == 6

    def test_gcd_violation(self, capsys):
        code, _, err = run(capsys, "generate", "--s", "4", "--r", "2", "--l", "2")
        assert code == 2 and "coprime" in err

    def test_missing_flags(self, capsys):
        assert run(capsys, "generate", "--s", "3")[0] == 2

    def test_bad_rational(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["generate", "--s", "3", "--r", "2", "--l", "2", "--a", "x/y"])
        assert exc.value.code == 2

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "f.json"
        code, out, _ = run(capsys, "generate", "--preset", "fig8", "--out", str(path), "--no-spatial")
        assert code == 0 and out == ""
        assert json.loads(path.read_text())["clearing"] == 64

    def test_deterministic(self, capsys):
        a = run(capsys, "generate", "--s", "5", "--r", "2", "--l", "3", "--b", "1/2")[1]
        b = run(capsys, "generate", "--s", "5", "--r", "2", "--l", "3", "--b", "1/2")[1]
        assert a == b


class TestBraid:
    def test_six_three(self, capsys):
        code, d = run_json(capsys, "braid", "--s", "5", "--r", "2", "--l", "2")
        assert code == 0
        assert d["tangle"]["reduced"] == [2, 1, 1, 2]
        assert d["predictions"]["genus_exact"] == 2

    def test_unknot(self, capsys):
        code, d = run_json(capsys, "braid", "--s", "3", "--r", "1", "--l", "2")
        assert d["components"] == 1 and d["predictions"]["unknot"]

    def test_link(self, capsys, tmp_path):
        path = tmp_path / "curve.csv"
        code, d = run_json(capsys, "braid", "--s", "4", "--r", "2", "--l", "3", "--curve-out", str(path))
        assert d["components"] == 2 and d["name"] == "L6a1"
        rows = list(csv.reader(path.read_text().splitlines()))
        assert rows[0] == ["component", "index", "x", "y", "z"] and len(rows) > 100

    def test_text(self, capsys):
        assert run(capsys, "braid", "--s", "3", "--r", "2", "--l", "2", "--format", "text")[1].strip() == "s1^-1 s2 s1^-1 s2"


class TestInvariants:
    def test_fig8(self, capsys):
        code, d = run_json(capsys, "invariants", "--s", "3", "--r", "2", "--l", "2")
        assert d["alexander"]["coeffs"] == [-1, 3, -1] and d["determinant"] == 5
        assert d["closedForm"]["equalUpToUnit"] and d["murasugi"]

    def test_eight_nine(self, capsys):
        code, d = run_json(capsys, "invariants", "--s", "7", "--r", "2", "--l", "2")
        assert d["closedForm"]["n"] == 3 and d["closedForm"]["equalUpToUnit"]
        assert d["fixture"]["name"] == "8_9"

    def test_link_notice(self, capsys):
        code, d = run_json(capsys, "invariants", "--s", "4", "--r", "2", "--l", "3")
        assert code == 0 and d["alexander"] is None and "MultiComponent" in d["notice"]


class TestVerify:
    def test_fig8(self, capsys, tmp_path):
        path = tmp_path / "nodal.csv"
        code, d = run_json(
            capsys, "verify", "--s", "3", "--r", "2", "--l", "2", "--lambda", "1",
            "--steps", "1024", "--samples", "20000", "--curve-out", str(path),
        )
        assert code == 0 and d["passed"] and d["fibration"]["marginPositive"]
        assert {"spec", "lambda", "word", "components", "minGradNorm", "passed"} <= set(d)
        assert path.read_text().startswith("component,index,x,y,z,w")

    def test_link(self, capsys):
        code, d = run_json(
            capsys, "verify", "--s", "4", "--r", "2", "--l", "3", "--lambda", "1/2", "--steps", "1024", "--no-fibration"
        )
        assert code == 0 and d["components"] == 2

    def test_large_lambda(self, capsys):
        code, d = run_json(capsys, "verify", "--s", "3", "--r", "2", "--l", "2", "--lambda", "100", "--steps", "512")
        assert code == 1 and d["passed"] is False


class TestHopfion:
    def test_trefoil(self, capsys):
        code, d = run_json(capsys, "hopfion", "--s", "2", "--r", "3", "--l", "1", "--N", "1", "--grid", "64", "--half-width", "5")
        assert code == 0 and d["charge"] == 2 and d["predicted"] == 2

    def test_zero(self, capsys, tmp_path):
        path = tmp_path / "grid.csv"
        code, d = run_json(capsys, "hopfion", "--preset", "fig8", "--N", "0", "--grid", "8", "--grid-out", str(path))
        assert code == 0 and d["charge"] == 0
        assert len(path.read_text().splitlines()) == 8**3 + 1


class TestMilnor:
    def test_two_radii(self, capsys):
        code, d = run_json(capsys, "milnor", "--s", "3", "--r", "2", "--l", "2", "--radii", "0.1,0.05", "--no-polynomial")
        assert code == 0 and d["sameWord"] and len(d["certificates"]) == 2
        assert d["certificates"][0]["word"] == [-1, 2, -1, 2]

    def test_odd_repeats(self, capsys):
        code, _, err = run(capsys, "milnor", "--s", "3", "--r", "3", "--l", "2")
        assert code == 2 and "OddRepeats" in err

    def test_brauner(self, capsys):
        code, d = run_json(capsys, "milnor", "--brauner", "2,3", "--radii", "0.5")
        assert code == 0 and d["certificates"][0]["word"] == [1, 1, 1]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "lemniscate", "braid", "--s", "3", "--r", "2", "--l", "2", "--out", "-"],
        capture_output=True, text=True, check=True,
    )
    assert json.loads(proc.stdout)["signed"] == [-1, 2, -1, 2]
