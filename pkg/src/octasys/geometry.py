"""Exact-rational colourful configurations and their configuration hypergraphs."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import EdgeSet, Shape, encode_edge

Point = tuple[Fraction, ...]

INSIDE = "inside"
OUTSIDE = "outside"
DEGENERATE = "degenerate"


class GeneralPositionError(ValueError):
    """A determinant vanished where general position forbids it."""


def as_point(coords: Sequence[object]) -> Point:
    return tuple(Fraction(c) for c in coords)  # type: ignore[arg-type]


def _det_sign(rows: list[list[int]]) -> int:
    # Bareiss fraction-free elimination, exact over the integers.
    m = [r[:] for r in rows]
    n = len(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * pivot - m[i][k] * m[k][j]) // prev
        prev = pivot
    last = m[n - 1][n - 1]
    return 0 if last == 0 else sign * (1 if last > 0 else -1)


def _homogeneous_row(p: Point) -> list[int]:
    # Scaling a row by a positive factor keeps the determinant's sign.
    scale = 1
    for x in p:
        scale = scale * x.denominator // math.gcd(scale, x.denominator)
    return [int(x * scale) for x in p] + [scale]


def orientation(points: Sequence[Sequence[object]]) -> int:
    """Sign of det [[p, 1] for p in points] for d+1 points in R^d."""
    pts = [as_point(p) for p in points]
    d = len(pts) - 1
    if any(len(p) != d for p in pts):
        raise ValueError(f"orientation needs {d + 1} points of dimension {d}")
    return _det_sign([_homogeneous_row(p) for p in pts])


def simplex_contains_origin(points: Sequence[Sequence[object]]) -> str:
    pts = [as_point(p) for p in points]
    sigma = orientation(pts)
    if sigma == 0:
        return DEGENERATE
    origin = (Fraction(0),) * (len(pts) - 1)
    inside = True
    for k in range(len(pts)):
        s = orientation(pts[:k] + [origin] + pts[k + 1:])
        if s == 0:
            return DEGENERATE
        if s != sigma:
            inside = False
    return INSIDE if inside else OUTSIDE


def origin_in_interior(colour_class: Sequence[Sequence[object]]) -> bool:
    verdict = simplex_contains_origin(colour_class)
    if verdict == DEGENERATE:
        raise GeneralPositionError("colour class is not in general position with the origin")
    return verdict == INSIDE


@dataclass(frozen=True)
class Configuration:
    """(d+1) colour classes of (d+1) rational points in R^d."""

    shape: Shape
    colour_classes: tuple[tuple[Point, ...], ...]

    def __post_init__(self) -> None:
        d = self.shape.d
        if len(self.colour_classes) != d + 1:
            raise ValueError(f"expected {d + 1} colour classes, got {len(self.colour_classes)}")
        for i, cls in enumerate(self.colour_classes):
            if len(cls) != d + 1:
                raise ValueError(f"colour {i} has {len(cls)} points, expected {d + 1}")
            for p in cls:
                if len(p) != d:
                    raise ValueError(f"point {p} of colour {i} is not in R^{d}")

    @classmethod
    def from_lists(cls, classes: Sequence[Sequence[Sequence[object]]]) -> Configuration:
        pts = tuple(tuple(as_point(p) for p in c) for c in classes)
        return cls(Shape(len(pts) - 1), pts)

    def point(self, colour: int, index: int) -> Point:
        return self.colour_classes[colour][index]

    def degenerate_subset(self) -> tuple[tuple[int, int] | None, ...] | None:
        """A (d+1)-subset of the points and the origin spanning no simplex, if any.

        Points are named ``(colour, index)``; ``None`` stands for the origin.
        """
        d = self.shape.d
        named: list[tuple[tuple[int, int] | None, Point]] = [(None, (Fraction(0),) * d)]
        for i, cls in enumerate(self.colour_classes):
            for j, p in enumerate(cls):
                named.append(((i, j), p))
        for subset in itertools.combinations(named, d + 1):
            if orientation([p for _, p in subset]) == 0:
                return tuple(name for name, _ in subset)
        return None

    def core_valid(self) -> bool:
        return all(origin_in_interior(cls) for cls in self.colour_classes)

    def validate(self, core: bool = True) -> None:
        bad = self.degenerate_subset()
        if bad is not None:
            raise GeneralPositionError(f"points {bad} are affinely dependent")
        if core:
            for i, cls in enumerate(self.colour_classes):
                if not origin_in_interior(cls):
                    raise ValueError(f"origin is not interior to the hull of colour {i}")


def configuration_hypergraph(c: Configuration, validate: bool = False, core: bool = True) -> EdgeSet:
    """Edges are the colourful simplices containing the origin."""
    if validate:
        c.validate(core=core)
    shape = c.shape
    h = EdgeSet(shape)
    for e in itertools.product(range(shape.points_per_colour), repeat=shape.colours):
        pts = [c.colour_classes[i][x] for i, x in enumerate(e)]
        verdict = simplex_contains_origin(pts)
        if verdict == DEGENERATE:
            names = ", ".join(f"({i},{x})" for i, x in enumerate(e))
            raise GeneralPositionError(f"colourful simplex on {names} is degenerate with the origin")
        if verdict == INSIDE:
            h.add_code(encode_edge(e))
    return h


def simplicial_depth_count(c: Configuration, validate: bool = False) -> int:
    return len(configuration_hypergraph(c, validate=validate))


def _random_point(rng: random.Random, d: int, scale: int) -> Point:
    while True:
        v = [rng.gauss(0.0, 1.0) for _ in range(d)]
        norm = math.sqrt(sum(x * x for x in v))
        if norm > 1e-9:
            break
    radius = rng.uniform(0.5, 1.0)
    return tuple(Fraction(round(x / norm * radius * scale), scale) for x in v)


def random_configuration(
    shape: Shape, seed: int, scale: int = 1000, max_attempts: int = 10_000
) -> Configuration:
    """Rejection-sample lattice points near the unit sphere until the configuration is valid.

    Deterministic in ``seed``.
    """
    rng = random.Random(seed)
    d = shape.d
    for _ in range(max_attempts):
        classes = []
        for _colour in range(d + 1):
            for _ in range(max_attempts):
                cls = tuple(_random_point(rng, d, scale) for _ in range(d + 1))
                if simplex_contains_origin(cls) == INSIDE:
                    classes.append(cls)
                    break
            else:
                raise RuntimeError(f"seed {seed}: no colour class containing the origin found")
        conf = Configuration(shape, tuple(classes))
        if conf.degenerate_subset() is None:
            return conf
    raise RuntimeError(f"seed {seed}: rejection budget of {max_attempts} exhausted")


def simplex_vertices(d: int) -> list[Point]:
    """e_1, ..., e_d and -(1, ..., 1): a rational simplex with the origin at its centroid."""
    verts = []
    for k in range(d):
        verts.append(tuple(Fraction(1 if j == k else 0) for j in range(d)))
    verts.append((Fraction(-1),) * d)
    return verts


def clustered_configuration(shape: Shape, seed: int = 0) -> Configuration:
    """Colour class i clustered near vertex i of a simplex around the origin.

    Every colourful simplex then contains the origin, giving all (d+1)^(d+1)
    edges.  The classes do not surround the origin, so the configuration is not
    core valid.
    """
    d = shape.d
    rng = random.Random(seed)
    radius = Fraction(1, 10 * (d + 1))
    # Coordinates within radius/d of the vertex stay within radius in norm.
    step = radius / d
    grid = 1000
    for _ in range(1000):
        classes = []
        for v in simplex_vertices(d):
            cls = []
            for _ in range(d + 1):
                offset = [Fraction(rng.randint(-grid, grid), grid) * step for _ in range(d)]
                cls.append(tuple(a + b for a, b in zip(v, offset)))
            classes.append(tuple(cls))
        conf = Configuration(shape, tuple(classes))
        if conf.degenerate_subset() is None:
            return conf
    raise RuntimeError("could not place clusters in general position")
