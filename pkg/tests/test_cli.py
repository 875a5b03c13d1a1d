import csv
import io
import json
import subprocess
import sys

from punq import corpus
from punq.cli import SCHEMA, run_cli
from punq.unitary import CNOT_MATRIX, QMatrix


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_cli([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def path(name):
    return corpus.path(name)


class TestCheck:
    def test_hadamard(self):
        code, out, _ = cli("check", path("hadamard"))
        assert code == 0
        assert out.startswith("H : #B -o #B  [accepted, mode times")

    def test_explicit_definition_and_mode(self):
        code, out, _ = cli("check", path("cnot"), "--def", "CNOT", "--mode", "empty")
        assert code == 1
        code, out, _ = cli("check", path("cnot"), "--def", "CNOT", "--mode", "times")
        assert code == 0

    def test_rejection_json(self):
        code, out, _ = cli("check", path("clone"), "--type", "#B -o #B * #B")
        assert code == 1
        report = json.loads(out)
        assert report["schema"] == SCHEMA and report["status"] == "rejected"
        assert report["definition"] == "clone"

    def test_accepted_json(self):
        code, out, _ = cli("check", path("hadamard"), "--json")
        assert code == 0
        doc = json.loads(out)
        assert doc["schema"] == SCHEMA and doc["type"] == "#B -o #B"

    def test_trace_prints_derivation(self):
        code, out, _ = cli("check", path("hadamard"), "--trace")
        assert code == 0 and "(if_sharp)" in out

    def test_untyped_mode(self):
        code, _, _ = cli("check", path("phase_superposed"), "--mode", "untyped:2")
        assert code == 0


class TestRun:
    def test_two_hadamards(self):
        code, out, _ = cli("run", path("two_hadamards"))
        assert code == 0
        assert out.splitlines() == ["|0>", "steps: 6"]

    def test_numeral_argument(self):
        code, out, _ = cli("run", path("walk"), "--arg", "1", "--json")
        doc = json.loads(out)
        assert code == 0 and doc["steps"] == 15 and doc["schema"] == SCHEMA

    def test_trace(self):
        code, out, _ = cli("run", path("two_hadamards"), "--trace")
        lines = out.splitlines()
        assert code == 0 and lines[0].startswith("#0 ")
        assert "#6 [Sup{If0, If1}] |0>" in lines

    def test_budget_exhausted(self):
        code, _, err = cli("run", path("two_hadamards"), "--budget", "2")
        assert code == 2 and err

    def test_deterministic(self):
        assert cli("run", path("grover")) == cli("run", path("grover"))


class TestMatrixAndSynth:
    def test_matrix(self):
        code, out, _ = cli("matrix", path("cnot"), "--def", "CNOT", "--n", "2")
        doc = json.loads(out)
        assert code == 0 and doc["classification"] == "unitary"
        assert QMatrix.from_json_obj(doc["matrix"]) == CNOT_MATRIX

    def test_round_trip(self, tmp_path):
        code, out, _ = cli("matrix", path("hadamard"), "--n", "1")
        assert code == 0
        mfile = tmp_path / "h.json"
        mfile.write_text(out)
        prog = tmp_path / "h.punq"
        code, _, _ = cli("synth", mfile, "--out", prog, "--name", "G")
        assert code == 0
        assert "def G : #B -o #B" in prog.read_text()
        assert cli("check", prog)[0] == 0
        code, again, _ = cli("matrix", prog, "--n", "1")
        assert json.loads(again)["matrix"] == json.loads(out)["matrix"]

    def test_non_isometry(self, tmp_path):
        mfile = tmp_path / "bad.json"
        mfile.write_text(QMatrix.from_rows([[1, 1], [0, 0]]).to_json())
        code, _, _ = cli("synth", mfile, "--out", tmp_path / "bad.punq")
        assert code == 2


class TestTranslate:
    def test_set(self):
        code, out, _ = cli("translate", path("xbasis"), "--def", "plus")
        assert code == 0 and out.strip() == "{ff, tt}"

    def test_trace_and_report(self):
        code, out, _ = cli("translate", path("two_hadamards"), "--trace")
        assert code == 0
        assert "#7 {ff, tt}" in out
        assert "all_found True nondecreasing True dominated True" in out


class TestBench:
    def test_csv(self):
        code, out, _ = cli("bench", path("walk"), "--range", "1..3", "--dlal-max", "2")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert list(rows[0]) == ["param", "punq_steps", "dlal_steps", "value_size"]
        assert [int(r["punq_steps"]) for r in rows] == [15, 25, 35]
        assert rows[0]["dlal_steps"] == "21" and rows[2]["dlal_steps"] == ""


class TestExitCodes:
    def test_usage(self):
        assert cli("frobnicate")[0] == 3
        assert cli("bench", path("walk"), "--range", "8..1")[0] == 3
        assert cli("check", path("hadamard"), "--mode", "loose")[0] == 3

    def test_missing_file(self, tmp_path):
        assert cli("run", tmp_path / "nope.punq")[0] == 4

    def test_syntax_error(self, tmp_path):
        bad = tmp_path / "bad.punq"
        bad.write_text("def main = if |0>;")
        code, _, err = cli("run", bad)
        assert code == 1 and "syntax" in err

    def test_unknown_definition(self):
        assert cli("run", path("hadamard"), "--def", "nope")[0] == 3

    def test_main_module(self):
        proc = subprocess.run([sys.executable, "-m", "punq", "run", str(path("two_hadamards"))], capture_output=True, text=True)
        assert proc.returncode == 0 and proc.stdout.startswith("|0>")
