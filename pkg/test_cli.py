import json
import os

import pandas as pd
import pytest

import config
import database
from run_toolkit import main

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")


def golden(name):
    with open(os.path.join(GOLDEN, name), "r", encoding="utf-8") as f:
        return f.read()


@pytest.fixture
def run(capsys, fixtures_file):
    """Run the CLI against a temporary fixtures file; returns (code, stdout, stderr)"""

    def invoke(*argv, fixtures=None):
        code = main(["--fixtures", fixtures or fixtures_file, *argv])
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return invoke


class TestGolden:
    def test_group_mul(self, run):
        code, out, _ = run("group", "--group", "cyclic:6", "--op", "mul", "--args", "[2, 5]")
        assert code == 0
        assert out == golden("group_mul.json")

    def test_set_product(self, run):
        code, out, _ = run("set", "--group", "cyclic:10", "--op", "product", "--A", "[1, 3]", "--B", "[0, 5]")
        assert code == 0
        assert out == golden("set_product.json")

    def test_diameter_csv(self, run):
        code, out, _ = run("--format", "csv", "diameter", "--group", "cyclic:8")
        assert code == 0
        assert out == golden("diameter_cycle8.csv")


class TestCommands:
    def test_infinite_order(self, run):
        code, out, _ = run("group", "--group", "heisenberg", "--op", "order", "--args", "[[1, 0, 0]]")
        assert code == 0
        values = json.loads(out)["values"]
        assert values["order"] == "inf"
        assert values["result"] == "inf"

    def test_commutator(self, run):
        code, out, _ = run("group", "--group", "heisenberg", "--op", "commutator", "--args", "[[1, 0, 0], [0, 1, 0]]")
        assert code == 0
        assert json.loads(out)["values"]["result"] == [0, 0, 1]

    def test_sumproduct(self, run):
        code, out, _ = run("set", "--group", "fp-ring:13", "--op", "sumproduct", "--A", "[1, 2, 4, 8]")
        assert code == 0
        assert json.loads(out)["values"]["productset"] == 7

    def test_exact_approx_constant(self, run):
        code, out, _ = run("set", "--group", "free-abelian:1", "--op", "approx", "--A", json.dumps(list(range(-5, 6))), "--exact")
        assert code == 0
        assert json.loads(out)["values"]["constant"]["k_exact"] == 2

    def test_growth(self, run):
        code, out, _ = run("growth", "--group", "free-abelian:1", "--S", "[-1, 0, 1]", "--n-max", "6", "--doubling-d", "1")
        assert code == 0
        report = json.loads(out)
        assert [row["size"] for row in report["table"]] == [3, 5, 7, 9, 11, 13]
        assert report["values"]["doubling_scale"] == 1

    def test_nilprog(self, run):
        spec = {"group": "heisenberg", "generators": [[1, 0, 0], [0, 1, 0]], "lengths": [1, 1]}
        code, out, err = run("nilprog", "--spec", json.dumps(spec), "--containment", "2")
        assert code == 0
        assert json.loads(out)["values"]["size"] == 13
        assert "[WARNING]" in err

    def test_nilprog_unknown_field(self, run):
        spec = {"group": "heisenberg", "generators": [[1, 0, 0]], "lengths": [1], "order": 3}
        code, _, err = run("nilprog", "--spec", json.dumps(spec))
        assert code == 2
        assert "'order'" in err

    def test_verify_battery(self, run):
        code, out, _ = run("verify", "unit-doubling", "--max-order", "5")
        assert code == 0
        assert json.loads(out)["values"]["violations"] == 0

    def test_limit_with_matrix_dump(self, run, tmp_path):
        dump = str(tmp_path / "matrix.csv")
        code, out, _ = run("limit", "--family", "cycle", "--sizes", "8,16", "--dump-matrix", dump)
        assert code == 0
        assert [row["size"] for row in json.loads(out)["table"]] == [8, 16]
        assert pd.read_csv(dump, index_col=0).shape == (16, 16)


class TestExitCodes:
    def test_malformed_spec_names_field(self, run):
        code, out, err = run("group", "--group", '{"kind": "cyclic", "n": 6, "m": 1}')
        assert code == 2
        assert out == ""
        assert "[ERROR]" in err and "'m'" in err

    def test_usage_error(self, run):
        code, _, _ = run("frobnicate")
        assert code == 2

    @pytest.mark.parametrize("command", ["diameter", "spectral"])
    def test_psl2_101_exceeds_element_cap(self, run, command):
        code, _, err = run(command, "--group", "psl2:101")
        assert code == 3
        assert "cap" in err

    def test_cap_override_is_restored(self, run):
        code, _, _ = run("--cap-elements", "10", "set", "--group", "cyclic:100", "--op", "power", "--A", "[0, 1]", "--n", "20")
        assert code == 3
        assert config.CAP_ELEMENTS == 250_000

    def test_violation_prints_witness(self, run, tmp_path):
        path = tmp_path / "drifted.json"
        path.write_text('{"entries": {"diameter:psl2:5": 0}, "version": 1}\n', encoding="utf-8")
        code, out, _ = run("diameter", "--group", "psl2:5", fixtures=str(path))
        assert code == 1
        payload = json.loads(out)
        assert payload["witness"]["key"] == "diameter:psl2:5"
        assert payload["witness"]["frozen"] == 0


class TestFixturesAndArchive:
    def test_refresh_then_frozen(self, run, fixtures_file):
        code, _, _ = run("--refresh-fixtures", "babai", "--primes", "3,5")
        assert code == 0
        with open(fixtures_file, encoding="utf-8") as f:
            entries = json.load(f)["entries"]
        assert "babai:standard:3,5" in entries

        code, _, err = run("babai", "--primes", "3,5")
        assert code == 0
        assert "unfrozen" not in err

    def test_output_is_byte_stable(self, run):
        argv = ("--seed", "4", "verify", "ruzsa-triangle", "--trials", "40")
        first = run(*argv)
        second = run("--threads", "3", *argv)
        assert first[0] == second[0] == 0
        assert first[1] == second[1]

    def test_archive(self, run, tmp_path):
        db = str(tmp_path / "runs.db")
        code, out, _ = run("--archive", db, "group", "--group", "cyclic:6")
        assert code == 0
        runs = database.load_runs_df(db)
        assert list(runs["command"]) == ["group"]
        assert runs["output"].iloc[0] == out
