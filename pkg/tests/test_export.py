import math

import pytest

from steerbound.export import Table, format_cell, parse_cell, read_table


@pytest.mark.parametrize("value, text", [
    (0.1 + 0.2, "0.3"),
    (1 / 3, "0.333333333333"),
    (1.0, "1"),
    (1e-7, "1e-07"),
    (math.inf, "impossible"),
    (True, "true"),
    (7, "7"),
    ("linear", "linear"),
])
def test_format_cell(value, text):
    assert format_cell(value) == text


def test_parse_cell_types():
    assert parse_cell("true") is True
    assert parse_cell("impossible") == math.inf
    assert parse_cell("12") == 12
    assert parse_cell("0.5") == 0.5
    assert parse_cell("extreme") == "extreme"


def test_csv_round_trip_is_byte_identical():
    table = Table(["n", "label", "x", "flag"], [[3, "a", 1 / 7, True], [10, "b", math.inf, False], [4, "c", 1.0, True]])
    text = table.to_csv()
    assert "\r" not in text
    assert text.splitlines()[0] == "n,label,x,flag"
    assert read_table(text, "csv").to_csv() == text


def test_json_round_trip_is_byte_identical():
    table = Table(["n", "x"], [[3, 2 / 3], [4, math.inf], [5, 1.0]])
    text = table.to_json()
    assert read_table(text, "json").to_json() == text
    assert table.render("json") == text
    with pytest.raises(ValueError):
        table.render("xml")
