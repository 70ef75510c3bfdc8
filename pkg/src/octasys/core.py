"""Colour classes, edges, transversals and octahedra for (d+1) colours of (d+1) points.

Edges are plain tuples ``(e_0, ..., e_d)`` where ``e_i`` is the label of the
point of colour ``i``.  Their integer code is ``sum(e_i * (d+1)**i)``, so colour
0 is the least significant digit and code order is colexicographic order of the
tuple.  Transversals and octahedra are compared lexicographically as tuples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, NamedTuple

Edge = tuple[int, ...]

MAX_DIMENSION = 6


@dataclass(frozen=True)
class Shape:
    """Dimension ``d``: d+1 colours with d+1 points each."""

    d: int

    def __post_init__(self) -> None:
        if not isinstance(self.d, int) or isinstance(self.d, bool):
            raise TypeError(f"dimension must be an int, got {self.d!r}")
        if not 1 <= self.d <= MAX_DIMENSION:
            raise ValueError(f"dimension must lie in [1, {MAX_DIMENSION}], got {self.d}")

    @property
    def colours(self) -> int:
        return self.d + 1

    @property
    def points_per_colour(self) -> int:
        return self.d + 1

    @property
    def num_points(self) -> int:
        return (self.d + 1) ** 2

    @property
    def num_edges(self) -> int:
        return (self.d + 1) ** (self.d + 1)

    def points(self) -> Iterator[PointRef]:
        for colour in range(self.colours):
            for index in range(self.points_per_colour):
                yield PointRef(colour, index)

    def edges(self) -> Iterator[Edge]:
        """All edges in code order."""
        for code in range(self.num_edges):
            yield decode_edge(code, self)


class PointRef(NamedTuple):
    colour: int
    index: int


def check_edge(e: Edge, shape: Shape) -> Edge:
    e = tuple(e)
    if len(e) != shape.colours:
        raise ValueError(f"edge {e} has {len(e)} coordinates, expected {shape.colours}")
    for x in e:
        if not isinstance(x, int) or not 0 <= x <= shape.d:
            raise ValueError(f"edge {e} has a coordinate outside [0, {shape.d}]")
    return e


def parse_edge(text: str) -> Edge:
    """``"31000"`` or ``"3 1 0 0 0"`` -> ``(3, 1, 0, 0, 0)``."""
    text = text.strip()
    parts = text.split() if " " in text else list(text)
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise ValueError(f"cannot parse edge {text!r}") from None


def format_edge(e: Edge) -> str:
    if max(e, default=0) < 10:
        return "".join(map(str, e))
    return " ".join(map(str, e))


def encode_edge(e: Edge) -> int:
    base = len(e)
    code = 0
    for x in reversed(e):
        if not 0 <= x < base:
            raise ValueError(f"edge {e} has a coordinate outside [0, {base - 1}]")
        code = code * base + x
    return code


def decode_edge(code: int, shape: Shape) -> Edge:
    base = shape.colours
    if not 0 <= code < shape.num_edges:
        raise ValueError(f"edge code {code} outside [0, {shape.num_edges})")
    out = []
    for _ in range(base):
        code, x = divmod(code, base)
        out.append(x)
    return tuple(out)


def zeros(e: Edge) -> int:
    return sum(1 for x in e if x == 0)


def adjacent_edges(e: Edge, shape: Shape) -> list[Edge]:
    """Edges differing from ``e`` in exactly one coordinate, in code order."""
    e = check_edge(e, shape)
    out = []
    for i in range(shape.colours):
        for x in range(shape.points_per_colour):
            if x != e[i]:
                out.append(e[:i] + (x,) + e[i + 1:])
    out.sort(key=encode_edge)
    return out


@dataclass(frozen=True, order=True)
class Transversal:
    """One point of every colour except ``omitted_colour``.

    ``choice`` lists the labels for the remaining colours in increasing colour
    order.
    """

    omitted_colour: int
    choice: tuple[int, ...]

    def point(self, colour: int) -> int:
        if colour == self.omitted_colour:
            raise ValueError(f"transversal omits colour {colour}")
        return self.choice[colour if colour < self.omitted_colour else colour - 1]

    def __str__(self) -> str:
        labels = [str(x) for x in self.choice]
        labels.insert(self.omitted_colour, "*")
        return "".join(labels)


@dataclass(frozen=True, order=True)
class Octahedron:
    """An unordered pair of disjoint transversals omitting the same colour.

    Stored with ``first < second``.
    """

    first: Transversal
    second: Transversal

    def __post_init__(self) -> None:
        if self.first.omitted_colour != self.second.omitted_colour:
            raise ValueError("octahedron transversals omit different colours")
        if len(self.first.choice) != len(self.second.choice):
            raise ValueError("octahedron transversals have different lengths")
        if any(a == b for a, b in zip(self.first.choice, self.second.choice)):
            raise ValueError(f"transversals {self.first} and {self.second} are not disjoint")
        if self.second < self.first:
            a, b = self.second, self.first
            object.__setattr__(self, "first", a)
            object.__setattr__(self, "second", b)

    @property
    def omitted_colour(self) -> int:
        return self.first.omitted_colour

    @property
    def pair(self) -> tuple[Transversal, Transversal]:
        return self.first, self.second

    @classmethod
    def of(cls, colour: int, first: Iterable[int], second: Iterable[int]) -> Octahedron:
        return cls(Transversal(colour, tuple(first)), Transversal(colour, tuple(second)))

    def edges(self, apex: int) -> list[Edge]:
        """The 2^d edges formed from points of the octahedron and ``apex``."""
        i = self.omitted_colour
        out = []
        for rest in itertools.product(*zip(self.first.choice, self.second.choice)):
            out.append(rest[:i] + (apex,) + rest[i:])
        return out

    def __str__(self) -> str:
        return f"({self.first},{self.second})"


def octahedra_with_base(shape: Shape, base: Transversal) -> Iterator[Octahedron]:
    """The d^d octahedra containing ``base``, ordered by the second transversal."""
    if len(base.choice) != shape.d or not 0 <= base.omitted_colour <= shape.d:
        raise ValueError(f"{base} is not a transversal for d={shape.d}")
    labels = range(shape.points_per_colour)
    options = [[x for x in labels if x != b] for b in base.choice]
    for other in itertools.product(*options):
        yield Octahedron(base, Transversal(base.omitted_colour, other))


def all_octahedra(shape: Shape, colour: int) -> Iterator[Octahedron]:
    """Every octahedron omitting ``colour`` once, in lexicographic order."""
    if not 0 <= colour <= shape.d:
        raise ValueError(f"colour {colour} outside [0, {shape.d}]")
    labels = range(shape.points_per_colour)
    for first in itertools.product(labels, repeat=shape.d):
        options = [[x for x in labels if x != a] for a in first]
        for second in itertools.product(*options):
            if second > first:
                yield Octahedron.of(colour, first, second)


def octahedron_count(shape: Shape) -> int:
    """Number of octahedra omitting one given colour."""
    d = shape.d
    return (d + 1) ** d * d ** d // 2


class EdgeSet:
    """A colourful hypergraph: a set of edges with per-point incidence counts.

    Membership is kept as a bit mask over edge codes.  Mutation is single
    writer; ``copy`` before handing a set to another thread.
    """

    __slots__ = ("shape", "_bits", "_size", "_incidence")

    def __init__(self, shape: Shape, edges: Iterable[Edge] = ()) -> None:
        self.shape = shape
        self._bits = 0
        self._size = 0
        self._incidence = [[0] * shape.points_per_colour for _ in range(shape.colours)]
        for e in edges:
            self.add(e)

    @classmethod
    def from_codes(cls, shape: Shape, codes: Iterable[int]) -> EdgeSet:
        h = cls(shape)
        for c in codes:
            h.add_code(c)
        return h

    @classmethod
    def full(cls, shape: Shape) -> EdgeSet:
        return cls.from_codes(shape, range(shape.num_edges))

    def add(self, e: Edge) -> None:
        self.add_code(encode_edge(check_edge(e, self.shape)))

    def remove(self, e: Edge) -> None:
        self.remove_code(encode_edge(check_edge(e, self.shape)))

    def add_code(self, code: int) -> None:
        bit = 1 << code
        if self._bits & bit:
            raise ValueError(f"edge {format_edge(decode_edge(code, self.shape))} already present")
        e = decode_edge(code, self.shape)
        self._bits |= bit
        self._size += 1
        for i, x in enumerate(e):
            self._incidence[i][x] += 1

    def remove_code(self, code: int) -> None:
        bit = 1 << code
        if not self._bits & bit:
            raise KeyError(f"edge {format_edge(decode_edge(code, self.shape))} not present")
        e = decode_edge(code, self.shape)
        self._bits &= ~bit
        self._size -= 1
        for i, x in enumerate(e):
            self._incidence[i][x] -= 1

    def __contains__(self, e: object) -> bool:
        try:
            code = encode_edge(check_edge(e, self.shape))  # type: ignore[arg-type]
        except (TypeError, ValueError):
            return False
        return bool(self._bits >> code & 1)

    def has_code(self, code: int) -> bool:
        return bool(self._bits >> code & 1)

    def __len__(self) -> int:
        return self._size

    def codes(self) -> list[int]:
        bits = self._bits
        out = []
        while bits:
            low = bits & -bits
            out.append(low.bit_length() - 1)
            bits ^= low
        return out

    def __iter__(self) -> Iterator[Edge]:
        return (decode_edge(c, self.shape) for c in self.codes())

    @property
    def mask(self) -> int:
        return self._bits

    def incidence(self, point: PointRef | tuple[int, int]) -> int:
        colour, index = point
        return self._incidence[colour][index]

    def incidence_table(self) -> list[list[int]]:
        return [row[:] for row in self._incidence]

    def recount(self) -> list[list[int]]:
        """Incidence counts computed from scratch."""
        counts = [[0] * self.shape.points_per_colour for _ in range(self.shape.colours)]
        for e in self:
            for i, x in enumerate(e):
                counts[i][x] += 1
        return counts

    def copy(self) -> EdgeSet:
        h = EdgeSet(self.shape)
        h._bits = self._bits
        h._size = self._size
        h._incidence = self.incidence_table()
        return h

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EdgeSet):
            return NotImplemented
        return self.shape == other.shape and self._bits == other._bits

    def __hash__(self) -> int:
        return hash((self.shape.d, self._bits))

    def __repr__(self) -> str:
        body = ", ".join(format_edge(e) for e in self)
        return f"EdgeSet(d={self.shape.d}, {{{body}}})"


class EdgeSpace:
    """Per-dimension lookup tables over edge codes, shared by the hot loops."""

    def __init__(self, shape: Shape) -> None:
        self.shape = shape
        n = shape.num_edges
        self.edges: list[Edge] = [decode_edge(c, shape) for c in range(n)]
        self.zeros: list[int] = [zeros(e) for e in self.edges]
        powers = [shape.colours ** i for i in range(shape.colours)]
        self.powers = powers
        neighbours = []
        for e in self.edges:
            code = encode_edge(e)
            nb = []
            for i, x in enumerate(e):
                for y in range(shape.points_per_colour):
                    if y != x:
                        nb.append(code + (y - x) * powers[i])
            nb.sort()
            neighbours.append(tuple(nb))
        self.neighbours: list[tuple[int, ...]] = neighbours

    def code(self, e: Edge) -> int:
        return encode_edge(e)


@lru_cache(maxsize=None)
def edge_space(d: int) -> EdgeSpace:
    return EdgeSpace(Shape(d))
