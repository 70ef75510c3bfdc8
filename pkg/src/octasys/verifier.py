"""Property 1 (no isolated vertex), Property 2 (octahedron parity) and isolated edges.

``is_octahedral_system`` checks every octahedron of every colour directly from
the definition, vectorised with numpy; it shares no code with the parity tables
beyond the colour-0 fast rejection, whose answer it does not depend on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Edge,
    EdgeSet,
    Octahedron,
    PointRef,
    Shape,
    Transversal,
    all_octahedra,
    encode_edge,
)
from .tables import LargeTable, row_transversals


@dataclass(frozen=True)
class ParityProfile:
    octahedron: Octahedron
    parities: tuple[int, ...]

    @property
    def constant(self) -> bool:
        return len(set(self.parities)) <= 1


@dataclass(frozen=True)
class Verdict:
    """Outcome of the octahedron parity check; truthy when the property holds."""

    holds: bool
    counterexample: Octahedron | None = None
    profile: ParityProfile | None = field(default=None, compare=False)

    def __bool__(self) -> bool:
        return self.holds


def has_isolated_vertex(h: EdgeSet) -> PointRef | None:
    """The first point (by colour, then label) lying in no edge."""
    for p in h.shape.points():
        if h.incidence(p) == 0:
            return p
    return None


def octahedron_parity(h: EdgeSet, omega: Octahedron) -> ParityProfile:
    shape = h.shape
    if len(omega.first.choice) != shape.d or omega.omitted_colour > shape.d:
        raise ValueError(f"octahedron {omega} does not fit d={shape.d}")
    parities = []
    for apex in range(shape.points_per_colour):
        count = sum(1 for e in omega.edges(apex) if h.has_code(encode_edge(e)))
        parities.append(count & 1)
    return ParityProfile(omega, tuple(parities))


def _indicator(h: EdgeSet) -> np.ndarray:
    n = h.shape.colours
    a = np.zeros((n,) * n, dtype=bool)
    for e in h:
        a[e] = True
    return a


def _box_parities(x: np.ndarray) -> np.ndarray:
    """Pair transform on every axis: out[a1, b1, a2, b2, ...] = xor of the 2^k box corners."""
    for axis in reversed(range(x.ndim)):
        x = np.expand_dims(x, axis + 1) ^ np.expand_dims(x, axis)
    return x


_CHUNK = 1 << 22


def _first_violation(a: np.ndarray, colour: int) -> tuple[tuple[int, ...], tuple[int, ...]] | None:
    """Lexicographically first pair (t, t') of disjoint transversals with a non-constant profile."""
    n = a.shape[0]
    d = a.ndim - 1
    x = np.moveaxis(a, colour, 0)
    # Leading axes are split off as (label, label) pairs so each chunk stays small.
    lead = 0
    while lead < d and n ** (2 * (d - lead)) > _CHUNK:
        lead += 1
    best = None
    labels = range(n)
    for firsts in itertools.product(labels, repeat=lead):
        for seconds in itertools.product(labels, repeat=lead):
            if any(p == q for p, q in zip(firsts, seconds)):
                continue
            sub = np.zeros_like(x[(slice(None),) + firsts])
            for corner in itertools.product((0, 1), repeat=lead):
                idx = tuple(s if c else f for f, s, c in zip(firsts, seconds, corner))
                sub ^= x[(slice(None),) + idx]
            m = d - lead
            par = _box_parities(sub[0])
            bad = np.zeros(par.shape, dtype=bool)
            for apex in range(1, n):
                bad |= _box_parities(sub[apex]) ^ par
            # Axes are (a1, b1, a2, b2, ...); reorder to (a..., b...) for lexicographic search.
            order = [2 * k for k in range(m)] + [2 * k + 1 for k in range(m)]
            bad = bad.transpose(order)
            eye = np.arange(n)[:, None] == np.arange(n)[None, :]
            for k in range(m):
                shape = [1] * (2 * m)
                shape[k] = n
                shape[m + k] = n
                bad &= ~eye.reshape(shape)
            hits = np.argwhere(bad)
            if len(hits):
                h0 = tuple(int(v) for v in hits[0])
                cand = (firsts + h0[:m], seconds + h0[m:])
                if best is None or cand < best:
                    best = cand
    return best


def is_octahedral_system(h: EdgeSet) -> Verdict:
    """Check Property 2 on every octahedron of every colour.

    Colour 0 octahedra containing the all-zero transversal are tried first via the
    colour-0 table; they are also the lexicographically first colour-0 octahedra.
    """
    shape = h.shape
    table = LargeTable.build(h)
    bad_rows = table.nonconstant_rows()
    if bad_rows:
        u = row_transversals(shape)[(bad_rows & -bad_rows).bit_length() - 1]
        omega = Octahedron.of(0, (0,) * shape.d, u)
        profile = octahedron_parity(h, omega)
        if not profile.constant:
            return Verdict(False, omega, profile)
    a = _indicator(h)
    for colour in range(shape.colours):
        found = _first_violation(a, colour)
        if found is not None:
            omega = Octahedron.of(colour, *found)
            return Verdict(False, omega, octahedron_parity(h, omega))
    return Verdict(True)


def violated_octahedra(h: EdgeSet, colour: int) -> list[Octahedron]:
    """Every violated octahedron of one colour, by direct enumeration (small d only)."""
    return [
        omega
        for omega in all_octahedra(h.shape, colour)
        if not octahedron_parity(h, omega).constant
    ]


def isolated_edges(h: EdgeSet) -> list[Edge]:
    """Edges of ``h`` with no other edge of ``h`` at Hamming distance 1, in code order."""
    shape = h.shape
    n = shape.colours
    out = []
    for e in h:
        lonely = True
        for i in range(n):
            for x in range(n):
                if x != e[i] and h.has_code(encode_edge(e[:i] + (x,) + e[i + 1:])):
                    lonely = False
                    break
            if not lonely:
                break
        if lonely:
            out.append(e)
    return out


def is_system_without_isolated_vertex(h: EdgeSet) -> bool:
    return has_isolated_vertex(h) is None and bool(is_octahedral_system(h))


@dataclass(frozen=True)
class Report:
    isolated_vertex: PointRef | None
    octahedral: Verdict
    isolated_edges: tuple[Edge, ...]
    score: int

    @property
    def holds(self) -> bool:
        return self.isolated_vertex is None and self.octahedral.holds


def report(h: EdgeSet) -> Report:
    return Report(
        has_isolated_vertex(h),
        is_octahedral_system(h),
        tuple(isolated_edges(h)),
        LargeTable.build(h).score,
    )


def base_transversal(shape: Shape, colour: int = 0) -> Transversal:
    return Transversal(colour, (0,) * shape.d)
