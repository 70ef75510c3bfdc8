"""Text formats for edge lists and configurations.

Edge list::

    d=4
    # comment
    0 0 0 0 0
    3 1 0 0 0

Configuration: ``d=<n>`` then (d+1) blocks of (d+1) lines, each line d
rationals ``p/q``; blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable

from .core import EdgeSet, Shape, encode_edge
from .geometry import Configuration

_HEADER = re.compile(r"^d\s*=\s*(\d+)$")


class FormatError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<input>") -> None:
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


def _content_lines(text: str) -> Iterable[tuple[int, str]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield number, line


def _read_header(lines: list[tuple[int, str]], source: str) -> Shape:
    if not lines:
        raise FormatError("missing header line 'd=<n>'", None, source)
    number, line = lines[0]
    m = _HEADER.match(line)
    if not m:
        raise FormatError(f"expected header 'd=<n>', got {line!r}", number, source)
    try:
        return Shape(int(m.group(1)))
    except ValueError as exc:
        raise FormatError(str(exc), number, source) from None


def parse_edge_list(text: str, source: str = "<input>") -> EdgeSet:
    lines = list(_content_lines(text))
    shape = _read_header(lines, source)
    h = EdgeSet(shape)
    for number, line in lines[1:]:
        parts = line.split()
        if len(parts) != shape.colours:
            raise FormatError(
                f"edge needs {shape.colours} indices, got {len(parts)}", number, source)
        try:
            e = tuple(int(p) for p in parts)
        except ValueError:
            raise FormatError(f"non-integer index in {line!r}", number, source) from None
        if any(not 0 <= x <= shape.d for x in e):
            raise FormatError(f"index outside [0, {shape.d}] in {line!r}", number, source)
        code = encode_edge(e)
        if h.has_code(code):
            raise FormatError(f"duplicate edge {line!r}", number, source)
        h.add_code(code)
    return h


def format_edge_list(h: EdgeSet, comments: Iterable[str] = ()) -> str:
    """Canonical text: comments, header, then edges in code order."""
    out = [f"# {c}" for c in comments]
    out.append(f"d={h.shape.d}")
    out.extend(" ".join(map(str, e)) for e in h)
    return "\n".join(out) + "\n"


def read_edge_list(path: str) -> EdgeSet:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh.read(), source=path)


def _rational(token: str) -> Fraction:
    if not re.fullmatch(r"[+-]?\d+(/\d+)?", token):
        raise ValueError(token)
    value = Fraction(token)
    return value


def parse_configuration(text: str, source: str = "<input>") -> Configuration:
    lines = list(_content_lines(text))
    shape = _read_header(lines, source)
    d = shape.d
    body = lines[1:]
    expected = (d + 1) ** 2
    if len(body) != expected:
        last = body[-1][0] if body else lines[0][0]
        raise FormatError(f"expected {expected} point lines, got {len(body)}", last, source)
    points = []
    for number, line in body:
        parts = line.split()
        if len(parts) != d:
            raise FormatError(f"point needs {d} coordinates, got {len(parts)}", number, source)
        try:
            points.append(tuple(_rational(p) for p in parts))
        except (ValueError, ZeroDivisionError):
            raise FormatError(f"bad rational in {line!r}", number, source) from None
    classes = tuple(tuple(points[i * (d + 1):(i + 1) * (d + 1)]) for i in range(d + 1))
    return Configuration(shape, classes)


def _fmt_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def format_configuration(c: Configuration, comments: Iterable[str] = ()) -> str:
    out = [f"# {line}" for line in comments]
    out.append(f"d={c.shape.d}")
    for i, cls in enumerate(c.colour_classes):
        out.append(f"# colour {i}")
        for p in cls:
            out.append(" ".join(_fmt_rational(x) for x in p))
    return "\n".join(out) + "\n"


def read_configuration(path: str) -> Configuration:
    with open(path, encoding="utf-8") as fh:
        return parse_configuration(fh.read(), source=path)
