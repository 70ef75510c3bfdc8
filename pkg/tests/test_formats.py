from pathlib import Path

import pytest

from octasys.core import EdgeSet, Shape
from octasys.formats import (
    FormatError,
    format_configuration,
    format_edge_list,
    parse_configuration,
    parse_edge_list,
    read_edge_list,
)
from octasys.geometry import random_configuration

GOLDEN = Path(__file__).parent / "golden"


def test_edge_list_golden_round_trip():
    path = GOLDEN / "edge_list_d4.txt"
    h = read_edge_list(str(path))
    assert h == EdgeSet(Shape(4), [(0,) * 5, (1, 0, 0, 0, 0), (2, 0, 0, 0, 0)])
    assert format_edge_list(h, ["the three base edges of the l=3 cases"]) == path.read_text()


def test_canonical_order_is_code_order():
    h = parse_edge_list("d=2\n2 2 2\n0 0 0\n1 0 0\n")
    assert format_edge_list(h) == "d=2\n0 0 0\n1 0 0\n2 2 2\n"


@pytest.mark.parametrize("text,line", [
    ("0 0 0\n", 1),
    ("d=2\n0 0\n", 2),
    ("d=2\n# c\n0 0 x\n", 3),
    ("d=2\n0 0 3\n", 2),
    ("d=2\n0 0 1\n0 0 1\n", 3),
    ("d=0\n", 1),
])
def test_edge_list_errors_carry_line_numbers(text, line):
    with pytest.raises(FormatError) as info:
        parse_edge_list(text, source="f.txt")
    assert info.value.line == line
    assert str(info.value).startswith(f"f.txt:{line}:")


def test_missing_header():
    with pytest.raises(FormatError):
        parse_edge_list("")


def test_configuration_round_trip_and_golden():
    c = random_configuration(Shape(2), 7)
    text = format_configuration(c)
    assert text == (GOLDEN / "config_d2_seed7.txt").read_text()
    assert parse_configuration(text) == c


@pytest.mark.parametrize("text", [
    "d=1\n1/2\n-1\n3\n",
    "d=1\n1/2\n-1\n3\n2.5\n",
    "d=1\n1/2\n-1\n3\n1/0\n",
    "d=1\n1/2 3\n-1\n3\n4\n",
])
def test_configuration_errors(text):
    with pytest.raises(FormatError):
        parse_configuration(text)
