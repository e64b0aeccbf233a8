import json
import math
from fractions import Fraction

import numpy as np
import pytest

from group_core import ElementSet
from reports import Report, encode, flat_cell


def test_encode_exact_values(cyclic):
    A = ElementSet.from_literals(cyclic(6), [4, 1])
    assert encode(Fraction(3, 4)) == {"num": 3, "den": 4}
    assert encode(math.inf) == "inf"
    assert encode(np.int64(7)) == 7
    assert encode(A) == [1, 4]
    assert encode((1, (2, 3))) == [1, [2, 3]]
    assert encode({1: True}) == {"1": True}


def test_encode_rejects_unknown_types():
    with pytest.raises(TypeError):
        encode(object())


def test_flat_cell():
    assert flat_cell(Fraction(3, 2)) == "3/2"
    assert flat_cell([1, 2]) == "[1,2]"
    assert flat_cell(5) == 5


def test_json_is_sorted_and_stable():
    report = Report("demo", values={"b": Fraction(1, 2), "a": math.inf}, checks={"ok": True})
    text = report.to_json()
    assert text.endswith("}\n")
    assert text == report.to_json()
    assert json.loads(text) == {
        "report": "demo",
        "values": {"a": "inf", "b": {"den": 2, "num": 1}},
        "table": [],
        "checks": {"ok": True},
    }
    assert text.index('"a"') < text.index('"b"')


def test_csv_uses_table_rows():
    report = Report("growth", table=[{"n": 1, "ratio": Fraction(1)}, {"n": 2, "ratio": Fraction(3, 2)}])
    assert report.to_csv() == "n,ratio\n1,1/1\n2,3/2\n"


def test_csv_falls_back_to_values():
    report = Report("single", values={"size": 3, "group": "cyclic:6"})
    assert report.to_csv() == "group,size\ncyclic:6,3\n"
