"""Parity tables over the octahedra containing the all-zero transversal.

For a colour ``i`` the table has one row per second transversal
``u in {1..d}^d`` (lexicographic, first non-omitted colour most significant)
and one column per point of colour ``i``.  Entry ``(u, c)`` is the parity of the
number of edges ``e`` with ``e_i = c`` whose other coordinates lie in
``{0, u_j}``.  Each column is held as an int bit mask over rows.

The large table of the search is the colour-0 table.  An edge set satisfies the
octahedron parity property for colour ``i`` exactly when every row of the
colour-``i`` table is constant: the indicator of a box ``{a_j, b_j}`` is, mod 2,
the sum of the boxes ``{0, a_j}`` and ``{0, b_j}`` in each coordinate.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Literal, Sequence

from .core import Edge, EdgeSet, Shape, check_edge, encode_edge, format_edge

Sense = Literal["add", "remove"]

DEBUG = bool(os.environ.get("OCTASYS_DEBUG"))


class TableLayout:
    """Where each edge lands in the table of one colour."""

    def __init__(self, d: int, colour: int) -> None:
        self.d = d
        self.colour = colour
        self.rows = d ** d
        self.all_rows = (1 << self.rows) - 1
        n = d + 1
        rest_masks = [self._rest_mask(rest) for rest in _rests(d)]
        stride = n ** colour
        columns = []
        masks = []
        for code in range(n ** n):
            low, rest_high = code % stride, code // stride
            high, col = divmod(rest_high, n)
            columns.append(col)
            masks.append(rest_masks[low + high * stride])
        self.column: list[int] = columns
        self.mask: list[int] = masks
        self.mask_size: list[int] = [m.bit_count() for m in masks]

    def _rest_mask(self, rest: Sequence[int]) -> int:
        d = self.d
        choices = [range(d) if r == 0 else (r - 1,) for r in rest]
        m = 0
        for digits in itertools.product(*choices):
            idx = 0
            for x in digits:
                idx = idx * d + x
            m |= 1 << idx
        return m

    def row_index(self, u: Sequence[int]) -> int:
        idx = 0
        for x in u:
            if not 1 <= x <= self.d:
                raise ValueError(f"row transversal {tuple(u)} must use labels 1..{self.d}")
            idx = idx * self.d + (x - 1)
        return idx


def _rests(d: int) -> Iterable[tuple[int, ...]]:
    # Rests in code order: first coordinate least significant.
    for rev in itertools.product(range(d + 1), repeat=d):
        yield tuple(reversed(rev))


@lru_cache(maxsize=None)
def layout(d: int, colour: int = 0) -> TableLayout:
    return TableLayout(d, colour)


def row_transversals(shape: Shape) -> list[tuple[int, ...]]:
    """Row labels of a table, in row order."""
    return list(itertools.product(range(1, shape.d + 1), repeat=shape.d))


def small_row_indices(d: int) -> list[int]:
    """Rows of the transversals 11..1, 22..2, ..., dd..d."""
    unit = sum(d ** k for k in range(d))
    return [(i - 1) * unit for i in range(1, d + 1)]


class LargeTable:
    """Parity table for one colour, maintained incrementally with its score."""

    __slots__ = ("shape", "colour", "layout", "cols", "score", "edges", "debug")

    def __init__(self, shape: Shape, colour: int = 0, debug: bool = DEBUG) -> None:
        self.shape = shape
        self.colour = colour
        self.layout = layout(shape.d, colour)
        self.cols = [0] * shape.colours
        self.score = 0
        self.edges = 0
        self.debug = debug

    @classmethod
    def build(cls, h: EdgeSet, colour: int = 0) -> LargeTable:
        t = cls(h.shape, colour)
        lay = t.layout
        edges = h.mask
        cols = t.cols
        for code in h.codes():
            cols[lay.column[code]] ^= lay.mask[code]
        t.edges = edges
        t.score = t.recompute_score()
        return t

    def copy(self) -> LargeTable:
        t = LargeTable.__new__(LargeTable)
        t.shape = self.shape
        t.colour = self.colour
        t.layout = self.layout
        t.cols = self.cols[:]
        t.score = self.score
        t.edges = self.edges
        t.debug = self.debug
        return t

    def recompute_score(self) -> int:
        c0 = self.cols[0]
        return sum((c ^ c0).bit_count() for c in self.cols[1:])

    def toggle(self, code: int) -> int:
        """Flip the parities for edge ``code``; returns the score change."""
        lay = self.layout
        col = lay.column[code]
        m = lay.mask[code]
        cols = self.cols
        size = lay.mask_size[code]
        if col:
            delta = size - 2 * ((cols[col] ^ cols[0]) & m).bit_count()
        else:
            c0 = cols[0]
            delta = 0
            for c in cols[1:]:
                delta += size - 2 * ((c ^ c0) & m).bit_count()
        cols[col] ^= m
        self.edges ^= 1 << code
        self.score += delta
        if self.debug:
            assert self.score == self.recompute_score(), "incremental score drifted"
        return delta

    def apply(self, e: Edge, sense: Sense) -> int:
        code = encode_edge(check_edge(e, self.shape))
        present = bool(self.edges >> code & 1)
        if sense == "add" and present:
            raise ValueError(f"cannot add {format_edge(e)}: already in the table's edge set")
        if sense == "remove" and not present:
            raise ValueError(f"cannot remove {format_edge(e)}: not in the table's edge set")
        if sense not in ("add", "remove"):
            raise ValueError(f"unknown sense {sense!r}")
        return self.toggle(code)

    def entry(self, u: Sequence[int], column: int) -> int:
        return self.cols[column] >> self.layout.row_index(u) & 1

    def row_bits(self, index: int) -> tuple[int, ...]:
        return tuple(c >> index & 1 for c in self.cols)

    def row(self, u: Sequence[int]) -> tuple[int, ...]:
        return self.row_bits(self.layout.row_index(u))

    def rows(self) -> list[tuple[int, ...]]:
        return [self.row_bits(i) for i in range(self.layout.rows)]

    def nonconstant_rows(self) -> int:
        """Bit mask of rows whose entries are not all equal."""
        c0 = self.cols[0]
        m = 0
        for c in self.cols[1:]:
            m |= c ^ c0
        return m

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LargeTable):
            return NotImplemented
        return (self.shape, self.colour, self.cols, self.score) == (
            other.shape, other.colour, other.cols, other.score)

    def __repr__(self) -> str:
        return f"LargeTable(d={self.shape.d}, colour={self.colour}, score={self.score})"


def build_large_table(h: EdgeSet, colour: int = 0) -> LargeTable:
    return LargeTable.build(h, colour)


def score(h: EdgeSet) -> int:
    return LargeTable.build(h).score


def apply_edge_delta(t: LargeTable, e: Edge, sense: Sense) -> LargeTable:
    """A new table with ``e`` added or removed; ``t`` is left untouched."""
    out = t.copy()
    out.apply(e, sense)
    return out


def colour_tables(h: EdgeSet) -> list[LargeTable]:
    return [LargeTable.build(h, i) for i in range(h.shape.colours)]


def tables_constant(h: EdgeSet) -> bool:
    """Octahedron parity property for every colour, decided through the tables."""
    return all(t.score == 0 for t in colour_tables(h))


@dataclass(frozen=True)
class SmallTable:
    """Rows for the transversals 11..1 .. dd..d; ``rows[i-1]`` is the row of ii..i."""

    d: int
    rows: tuple[tuple[int, ...], ...]

    def entry(self, row: int, column: int) -> int:
        return self.rows[row - 1][column]

    def format(self) -> str:
        d = self.d
        label_width = d + 1
        header = " " * label_width + " | " + " ".join(str(c) for c in range(d + 1))
        lines = [header]
        for i, bits in enumerate(self.rows, start=1):
            label = "*" + str(i) * d
            lines.append(label + " | " + " ".join(str(b) for b in bits))
        return "\n".join(lines)


def small_table_of(t: LargeTable) -> SmallTable:
    rows = tuple(t.row_bits(i) for i in small_row_indices(t.shape.d))
    return SmallTable(t.shape.d, rows)


def build_small_table(h: EdgeSet) -> SmallTable:
    return small_table_of(LargeTable.build(h))


def default_odd_rows(d: int, b: int) -> tuple[int, ...]:
    if not 0 <= b <= d:
        raise ValueError(f"b must lie in [0, {d}], got {b}")
    return tuple(range(1, b + 1))


def small_table_mismatches(
    t: SmallTable, b: int, odd_rows: Iterable[int] | None = None
) -> list[tuple[int, int]]:
    """Entries ``(row, column)`` disagreeing with the designated row parity.

    ``odd_rows`` (1-based) must have exactly ``b`` members; the default is rows
    ``1..b``.  The result is in row-major order.
    """
    odd = set(default_odd_rows(t.d, b) if odd_rows is None else odd_rows)
    if len(odd) != b or not odd <= set(range(1, t.d + 1)):
        raise ValueError(f"odd rows {sorted(odd)} do not designate {b} rows of 1..{t.d}")
    out = []
    for i, bits in enumerate(t.rows, start=1):
        want = 1 if i in odd else 0
        out.extend((i, c) for c, bit in enumerate(bits) if bit != want)
    return out
