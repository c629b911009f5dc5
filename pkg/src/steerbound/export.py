"""Tabular CSV/JSON output with stable, round-trippable formatting.

Floats are written with 12 significant digits and infinite critical
purities as ``impossible``.  Parsing a written file and writing it again
reproduces it byte for byte.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

from .geometry import MeasurementSet
from .loss_bounds import (
    REGIMES,
    BoundCurve,
    ComparisonRow,
    critical_purity,
    failure_frontiers,
)

IMPOSSIBLE_TEXT = "impossible"


def format_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value) and value > 0:
            return IMPOSSIBLE_TEXT
        if math.isnan(value):
            return "nan"
        return f"{value:.12g}"
    return str(value)


def parse_cell(text: str) -> Any:
    if text == "true":
        return True
    if text == "false":
        return False
    if text == IMPOSSIBLE_TEXT:
        return math.inf
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _json_value(value: Any) -> Any:
    if isinstance(value, float):
        if math.isinf(value) and value > 0:
            return IMPOSSIBLE_TEXT
        if math.isnan(value):
            return None
        return float(f"{value:.12g}")
    return value


def _from_json_value(value: Any) -> Any:
    if value == IMPOSSIBLE_TEXT:
        return math.inf
    if value is None:
        return math.nan
    return value


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)

    def column(self, name: str) -> list[Any]:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_cell(v) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Table":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        return cls(header, [[parse_cell(c) for c in row] for row in reader])

    def to_records(self) -> list[dict]:
        return [{c: _json_value(v) for c, v in zip(self.columns, row)} for row in self.rows]

    def to_json(self) -> str:
        return json.dumps({"columns": self.columns, "rows": self.to_records()}, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Table":
        payload = json.loads(text)
        cols = payload["columns"]
        return cls(cols, [[_from_json_value(r[c]) for c in cols] for r in payload["rows"]])

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"format must be csv or json, got {fmt!r}")


def read_table(text: str, fmt: str) -> Table:
    return Table.from_csv(text) if fmt == "csv" else Table.from_json(text)


def curves_table(curves: Sequence[BoundCurve]) -> Table:
    table = Table(["n", "criterion", "epsilon", "envelope", "post_selected", "sqrt_post_selected", "violation_possible"])
    for c in curves:
        for r in c.rows:
            table.rows.append([c.n, c.criterion, r.epsilon, r.envelope, r.post_selected, r.sqrt_post_selected, r.violation_possible])
    return table


def points_table(curves: Sequence[BoundCurve]) -> Table:
    table = Table(["n", "criterion", "m", "epsilon", "value", "post_selected", "status"])
    for c in curves:
        for p, status in c.point_status():
            table.rows.append([c.n, c.criterion, p.m, p.epsilon, p.value, p.post_selected, status])
    return table


def comparison_table(by_n: dict[int, list[ComparisonRow]]) -> Table:
    table = Table(["n", "epsilon", "k_post_selected", "sqrt_g_post_selected", "difference"])
    for n, rows in by_n.items():
        for r in rows:
            table.rows.append([n, r.epsilon, r.linear, r.sqrt_variance, r.difference])
    return table


def naive_table(sets: Sequence[MeasurementSet], grid: Sequence[float]) -> Table:
    table = Table(["n", "epsilon", *REGIMES])
    for ms in sets:
        for eps in grid:
            table.rows.append([ms.n, float(eps), *(critical_purity(r, ms, eps) for r in REGIMES)])
    return table


def frontiers_table(sets: Sequence[MeasurementSet]) -> Table:
    """Efficiency frontiers per regime; the ``limit`` row holds the large-``n`` limits."""
    table = Table(["n", *REGIMES])
    for ms in sets:
        f = failure_frontiers(ms)
        table.rows.append([ms.n, *(f[r] for r in REGIMES)])
    # g_n = 1/3 for every 3-D design, so the anger variance frontier is 1/sqrt(3);
    # the linear bound tends to 1/2 as the settings fill the sphere
    limit = {"anger_linear": 0.5, "anger_variance": 1.0 / math.sqrt(3.0), "depression_linear": 0.5,
             "depression_variance": 1.0 / 3.0, "hope_linear": 0.0, "hope_variance": 0.0}
    table.rows.append(["limit", *(limit[r] for r in REGIMES)])
    return table
