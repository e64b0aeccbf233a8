"""
Structured result records and their JSON / CSV renderings
"""

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List

import numpy as np
import pandas as pd


def encode(value: Any) -> Any:
    """
    Convert a result value into plain JSON data

    Fractions become {"num", "den"}, infinities the string "inf",
    element sets their sorted literal arrays, tuples lists.
    """
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, Fraction):
        return {"num": value.numerator, "den": value.denominator}
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, int):
        return value
    if hasattr(value, "to_dict"):
        return encode(value.to_dict())
    if hasattr(value, "literals"):
        return value.literals()
    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [encode(v) for v in value]
    raise TypeError(f"cannot encode {type(value).__name__} in a report")


def flat_cell(value: Any) -> Any:
    """Scalar rendering for CSV cells"""
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    encoded = encode(value)
    if isinstance(encoded, (list, dict)):
        return json.dumps(encoded, sort_keys=True, separators=(",", ":"))
    return encoded


@dataclass
class Report:
    """
    Result of one toolkit operation

    values: named scalar results
    table:  rows with identical keys (growth tables, per-size rows, ...)
    checks: named inline assertions that were evaluated, with their outcome
    """

    name: str
    values: Dict[str, Any] = field(default_factory=dict)
    table: List[Dict[str, Any]] = field(default_factory=list)
    checks: Dict[str, bool] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "report": self.name,
            "values": encode(self.values),
            "table": encode(self.table),
            "checks": encode(self.checks),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_frame(self) -> pd.DataFrame:
        """Table rows as a DataFrame; a single row of values when there is no table"""
        rows = self.table if self.table else [self.values]
        frame = pd.DataFrame([{k: flat_cell(v) for k, v in row.items()} for row in rows])
        return frame.reindex(sorted(frame.columns), axis=1)

    def to_csv(self) -> str:
        return self.to_frame().to_csv(index=False, lineterminator="\n")
