"""Brute-force oracles for small dimensions.

Two independent enumerations of octahedral systems without isolated vertex:

* ``subsets``: every edge subset by increasing size, one representative per
  orbit of the group (colour permutations) x (permutations of labels 1..d in
  each colour), label 0 fixed.  Used for d <= 2.
* ``partitions``: a covering system of k edges, read column by column, assigns
  each colour a surjection from the k edges onto its d+1 points.  Up to
  relabelling, edge order and permuting colours 1..d this is a tuple of set
  partitions with exactly d+1 blocks, the first in a fixed canonical form.
  Used for d = 3.

Every witness is re-checked with ``is_octahedral_system`` on the raw edge set.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

from .core import EdgeSet, Shape, encode_edge
from .tables import layout
from .verifier import has_isolated_vertex, is_octahedral_system

# Upper limit on orbit representatives the subset oracle may generate.
SUBSET_BUDGET = 100_000
PARTITION_MAX_EDGES = {1: 8, 2: 9, 3: 6}


class OracleBudgetError(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    shape: Shape
    max_edges: int
    size: int | None
    witness: EdgeSet | None
    candidates: int
    method: str

    @property
    def found(self) -> bool:
        return self.size is not None


@lru_cache(maxsize=None)
def group_code_maps(d: int) -> tuple[tuple[int, ...], ...]:
    """Edge-code permutations for colour permutations x label permutations fixing 0."""
    shape = Shape(d)
    n = shape.colours
    edges = list(shape.edges())
    label_perms = [(0,) + p for p in itertools.permutations(range(1, n))]
    maps = []
    for colour_perm in itertools.permutations(range(n)):
        for sigmas in itertools.product(label_perms, repeat=n):
            m = []
            for e in edges:
                image = [0] * n
                for i, x in enumerate(e):
                    image[colour_perm[i]] = sigmas[i][x]
                m.append(encode_edge(image))
            maps.append(tuple(m))
    return tuple(maps)


def canonical_form(codes: Iterable[int], d: int) -> tuple[int, ...]:
    codes = tuple(codes)
    return min(tuple(sorted(m[c] for c in codes)) for m in group_code_maps(d))


def _subset_estimate(shape: Shape, max_edges: int) -> float:
    g = len(group_code_maps(shape.d))
    return sum(math.comb(shape.num_edges, k) for k in range(max_edges + 1)) / g


def orbit_levels(shape: Shape, max_edges: int) -> Iterator[list[tuple[int, ...]]]:
    """Orbit representatives of all edge subsets, one sorted list per size 0..max_edges."""
    if shape.d > 2:
        raise OracleBudgetError(f"subset enumeration is limited to d <= 2, got d={shape.d}")
    if not 0 <= max_edges <= shape.num_edges:
        raise OracleBudgetError(f"max_edges must lie in [0, {shape.num_edges}]")
    estimate = _subset_estimate(shape, max_edges)
    if estimate > SUBSET_BUDGET:
        raise OracleBudgetError(
            f"d={shape.d}, max_edges={max_edges} needs about {estimate:.0f} orbit "
            f"representatives, above the budget of {SUBSET_BUDGET}")
    d = shape.d
    level: list[tuple[int, ...]] = [()]
    yield level
    all_codes = range(shape.num_edges)
    for _ in range(max_edges):
        nxt = set()
        for rep in level:
            present = set(rep)
            for c in all_codes:
                if c not in present:
                    nxt.add(canonical_form(rep + (c,), d))
        level = sorted(nxt)
        yield level


def octahedral_systems(
    shape: Shape, max_edges: int, cover: bool = True
) -> Iterator[EdgeSet]:
    """Orbit representatives that are octahedral systems (and cover every point if asked)."""
    for level in orbit_levels(shape, max_edges):
        for rep in level:
            h = EdgeSet.from_codes(shape, rep)
            if cover and has_isolated_vertex(h) is not None:
                continue
            if is_octahedral_system(h):
                yield h


def _min_by_subsets(shape: Shape, max_edges: int) -> OracleResult:
    seen = 0
    for size, level in enumerate(orbit_levels(shape, max_edges)):
        for rep in level:
            seen += 1
            h = EdgeSet.from_codes(shape, rep)
            if has_isolated_vertex(h) is None and is_octahedral_system(h):
                return OracleResult(shape, max_edges, size, h, seen, "subsets")
    return OracleResult(shape, max_edges, None, None, seen, "subsets")


@lru_cache(maxsize=None)
def surjections(k: int, blocks: int) -> tuple[tuple[int, ...], ...]:
    """Restricted growth strings of length k using exactly ``blocks`` labels."""
    out = []

    def grow(prefix: list[int], used: int) -> None:
        if len(prefix) == k:
            if used == blocks:
                out.append(tuple(prefix))
            return
        if blocks - used > k - len(prefix):
            return
        for x in range(min(used + 1, blocks)):
            prefix.append(x)
            grow(prefix, max(used, x + 1))
            prefix.pop()

    grow([], 0)
    return tuple(out)


def _canonical_first_columns(k: int, blocks: int) -> list[tuple[int, ...]]:
    out = []
    for sizes in _partitions_of(k, blocks):
        col: list[int] = []
        for label, s in enumerate(sizes):
            col.extend([label] * s)
        out.append(tuple(col))
    return out


def _partitions_of(k: int, parts: int, largest: int | None = None) -> Iterator[tuple[int, ...]]:
    """Non-increasing tuples of ``parts`` positive integers summing to k."""
    if largest is None:
        largest = k
    if parts == 0:
        if k == 0:
            yield ()
        return
    for first in range(min(k - parts + 1, largest), 0, -1):
        for rest in _partitions_of(k - first, parts - 1, first):
            yield (first,) + rest


def _tables_constant(codes: list[int], d: int) -> bool:
    n = d + 1
    for colour in range(n):
        lay = layout(d, colour)
        cols = [0] * n
        for c in codes:
            cols[lay.column[c]] ^= lay.mask[c]
        c0 = cols[0]
        for c in cols[1:]:
            if c != c0:
                return False
    return True


def covering_systems(shape: Shape, k: int) -> Iterator[EdgeSet]:
    """Covering octahedral systems with exactly k edges, up to symmetry (partition method)."""
    d = shape.d
    n = d + 1
    cols = surjections(k, n)
    powers = [n ** i for i in range(n)]
    for first in _canonical_first_columns(k, n):
        for rest in itertools.combinations_with_replacement(cols, d):
            columns = (first,) + rest
            codes = [sum(columns[i][r] * powers[i] for i in range(n)) for r in range(k)]
            if len(set(codes)) != k:
                continue
            if _tables_constant(codes, d):
                yield EdgeSet.from_codes(shape, codes)


def _min_by_partitions(shape: Shape, max_edges: int) -> OracleResult:
    limit = PARTITION_MAX_EDGES.get(shape.d)
    if limit is None or max_edges > limit:
        raise OracleBudgetError(
            f"partition oracle supports max_edges <= {limit} at d={shape.d}"
            if limit is not None else f"no brute-force oracle for d={shape.d}")
    seen = 0
    for k in range(shape.colours, max_edges + 1):
        for h in covering_systems(shape, k):
            seen += 1
            if has_isolated_vertex(h) is None and is_octahedral_system(h):
                return OracleResult(shape, max_edges, k, h, seen, "partitions")
    return OracleResult(shape, max_edges, None, None, seen, "partitions")


def brute_force_min_size(shape: Shape, max_edges: int, method: str | None = None) -> OracleResult:
    """Smallest octahedral system without isolated vertex having at most ``max_edges`` edges.

    Raises ``OracleBudgetError`` when the request is outside the feasible range.
    """
    if max_edges < 0:
        raise OracleBudgetError("max_edges must be non-negative")
    if method is None:
        method = "subsets" if shape.d <= 2 else "partitions"
    if method == "subsets":
        return _min_by_subsets(shape, max_edges)
    if method == "partitions":
        return _min_by_partitions(shape, max_edges)
    raise ValueError(f"unknown oracle method {method!r}")


def extensions(
    shape: Shape, base: Iterable[int], forbidden: Iterable[int], max_edges: int
) -> Iterator[EdgeSet]:
    """Every superset of ``base`` avoiding ``forbidden`` with at most ``max_edges`` edges."""
    base = sorted(set(base))
    blocked = set(forbidden) | set(base)
    free = [c for c in range(shape.num_edges) if c not in blocked]
    for extra in range(max(0, max_edges - len(base)) + 1):
        for add in itertools.combinations(free, extra):
            yield EdgeSet.from_codes(shape, base + list(add))
