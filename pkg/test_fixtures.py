import json
import os
import shutil
from fractions import Fraction

import pytest

from errors import InvalidInput, PropertyViolation
from fixtures import FixtureStore
from run_toolkit import main

REPOSITORY_FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures", "regression.json")


def test_missing_file_starts_empty(tmp_path):
    store = FixtureStore(str(tmp_path / "absent.json"))
    assert store.entries == {}
    assert store.verify("diameter:psl2:5", 7) == "unfrozen"
    store.save()
    assert not (tmp_path / "absent.json").exists()


def test_refresh_then_check(fixtures_file):
    store = FixtureStore(fixtures_file, refresh=True)
    assert store.verify("nilprog:demo", {"size": 13, "constant": Fraction(3, 2)}) == "refreshed"
    store.save()

    saved = json.loads(open(fixtures_file, encoding="utf-8").read())
    assert saved["version"] == 1
    assert saved["entries"]["nilprog:demo"] == {"constant": {"den": 2, "num": 3}, "size": 13}

    again = FixtureStore(fixtures_file)
    assert again.verify("nilprog:demo", {"size": 13, "constant": Fraction(3, 2)}) == "frozen"
    assert again.statuses == {"nilprog:demo": "frozen"}


def test_drift_is_a_violation(fixtures_file):
    store = FixtureStore(fixtures_file, refresh=True)
    store.verify("babai:standard:5", [5])
    store.save()
    with pytest.raises(PropertyViolation) as info:
        FixtureStore(fixtures_file).verify("babai:standard:5", [6])
    assert info.value.witness["frozen"] == [5]


def test_envelope(fixtures_file):
    store = FixtureStore(fixtures_file, refresh=True)
    assert store.envelope("limit:cycle") is None
    store.verify_envelope("limit:cycle", {8: 0.125, 16: 0.0625})
    store.save()

    checked = FixtureStore(fixtures_file)
    assert checked.envelope("limit:cycle") == {8: 0.125, 16: 0.0625}
    assert checked.verify_envelope("limit:cycle", {8: 0.1, 32: 0.5}) == "frozen"
    with pytest.raises(PropertyViolation):
        checked.verify_envelope("limit:cycle", {16: 0.07})


def test_version_mismatch(tmp_path):
    path = tmp_path / "old.json"
    path.write_text('{"entries": {}, "version": 0}', encoding="utf-8")
    with pytest.raises(InvalidInput):
        FixtureStore(str(path))


def test_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{", encoding="utf-8")
    with pytest.raises(InvalidInput):
        FixtureStore(str(path))


def test_repository_fixtures_load():
    store = FixtureStore(REPOSITORY_FIXTURES)
    assert isinstance(store.entries, dict)


def nilprog_key(length):
    spec = {"generators": [[1, 0, 0], [0, 1, 0]], "group": {"kind": "heisenberg-Z"}, "kernel": None, "lengths": [length, length]}
    return f"nilprog:{json.dumps(spec, sort_keys=True)}"


FREE_ABELIAN_SCALES = "all-scales:free-abelian:2:[[-1, 0], [0, -1], [0, 0], [0, 1], [1, 0]]:2-12"


def test_repository_fixtures_are_populated():
    entries = FixtureStore(REPOSITORY_FIXTURES).entries
    expected = [
        "diameter:psl2:3",
        "diameter:psl2:5",
        "diameter:psl2:7",
        "diameter:psl2:11",
        "babai:standard:3,5",
        "babai:standard:3,5,7,11",
        "limit:grid",
        "limit:cycle",
        FREE_ABELIAN_SCALES,
        *(nilprog_key(length) for length in (1, 2, 3, 4, 6)),
    ]
    assert [key for key in expected if key not in entries] == []
    assert entries["babai:standard:3,5,7,11"] == [3, 6, 6, 9]
    assert entries[nilprog_key(4)] == {"class": 2, "k_greedy": 51, "size": 1033}
    assert [row["size"] for row in entries[FREE_ABELIAN_SCALES]] == [2 * m * m + 2 * m + 1 for m in range(2, 13)]
    assert entries["limit:grid"] == {"8": 0.125, "16": 0.0625, "32": 0.03125, "64": 0.015625}


@pytest.mark.parametrize(
    "argv",
    [
        ("diameter", "--group", "psl2:5"),
        ("babai", "--primes", "3,5"),
        ("limit", "--family", "grid", "--sizes", "8,16"),
        ("limit", "--family", "cycle", "--sizes", "8,16"),
        ("growth", "--group", "free-abelian:2", "--symmetrize", "--scales", "2", "12"),
        ("nilprog", "--spec", '{"group": "heisenberg", "generators": [[1,0,0],[0,1,0]], "lengths": [2,2]}'),
    ],
)
def test_repository_values_are_reproduced(argv, tmp_path, capsys):
    copy = tmp_path / "regression.json"
    shutil.copyfile(REPOSITORY_FIXTURES, copy)
    code = main(["--fixtures", str(copy), *argv])
    err = capsys.readouterr().err
    assert code == 0, err
    assert "unfrozen" not in err
    assert copy.read_bytes() == open(REPOSITORY_FIXTURES, "rb").read()
