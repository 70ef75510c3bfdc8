"""Case-split branch-and-prune search for small octahedral systems without isolated vertex.

A case fixes colour 0, the base transversal 0..0 and the triple ``(l, b, j)``:
``l`` edges contain the base transversal (they are ``x0..0`` for ``x < l``,
the other ``x0..0`` are forbidden), small-table rows ``1..b`` are odd and the
rest even, and the least covered point of colour 0 lies in exactly ``j`` edges.

The search is a depth-first walk where every branching is a disjunction "the
final system contains one of these edges"; child ``i`` also forbids children
``0..i-1`` so no edge set is reached twice.  Branch order:

1. small-table repair: an entry of the small table with the wrong parity can be
   fixed only by an edge of its family (colour-0 label = column, other labels
   in ``{0, row}``).  At the root only one representative per class under
   permuting colours 1..d is kept.
2. isolated-edge repair, when ``target <= d*d``: an octahedral system this small
   contains no isolated edge, so some neighbour must join.
3. leaf test, then either targeted repair (a violated octahedron of some colour,
   or an under-covered point) or, with ``targeted=False``, every free edge.

Checkpoints store the branch trail; resuming replays it deterministically.
"""

from __future__ import annotations

import itertools
import json
import time
import multiprocessing
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Any, Iterable, Sequence

from . import __version__
from .core import EdgeSet, Shape, decode_edge, edge_space, encode_edge
from .tables import LargeTable, small_row_indices, small_table_mismatches, small_table_of
from .verifier import has_isolated_vertex, is_octahedral_system

CERTIFICATE_FORMAT = "octasys-certificate/1"
CHECKPOINT_FORMAT = "octasys-checkpoint/1"
REPORT_FORMAT = "octasys-report/1"

EXHAUSTED = "exhausted"
WITNESS = "witness"
BUDGET_EXCEEDED = "budget-exceeded"

PRUNE_REASONS = ("uncovered", "undercount", "subcase")
BRANCH_KINDS = ("table", "isolated", "parity", "cover", "free")


class CheckpointError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class CaseParams:
    l: int
    b: int
    j: int
    target: int

    def validate(self, d: int) -> None:
        for name in ("l", "b", "j"):
            v = getattr(self, name)
            if not 1 <= v <= d:
                raise ValueError(f"{name}={v} outside [1, {d}]")
        if self.j + self.b < d + 1:
            raise ValueError(f"j + b = {self.j + self.b} < d + 1 = {d + 1}")
        if self.l > max_l(d, self.target):
            raise ValueError(f"l={self.l} exceeds {max_l(d, self.target)} for target {self.target}")
        if self.target < 0:
            raise ValueError("target must be non-negative")

    @property
    def triple(self) -> tuple[int, int, int]:
        return self.l, self.b, self.j


def max_l(d: int, target: int) -> int:
    # l = d forces at least d*d + 1 edges, so it only matters beyond d*d.
    return d - 1 if target <= d * d else d


def case_lower_bound(d: int, l: int, b: int, j: int) -> int:
    """Edge-count lower bound for a case, from the imported coverage and parity bounds."""
    bound = max(j * (d + 1), (b + l) * (d + 1) - 2 * b * l)
    if 2 * l >= d + 2:
        bound = max(bound, d * l + 1)
    return bound


def generate_cases(d: int, target: int) -> list[CaseParams]:
    """Every (l, b, j) whose lower bound does not exceed ``target``; l, then b, then j descending."""
    out = []
    for l in range(max_l(d, target), 0, -1):
        for b in range(d, 0, -1):
            for j in range(d, 0, -1):
                if j + b < d + 1:
                    continue
                if case_lower_bound(d, l, b, j) <= target:
                    out.append(CaseParams(l, b, j, target))
    return out


def odd_row_designations(d: int, b: int) -> list[tuple[int, ...]]:
    """Choices of b odd small-table rows, one per orbit under relabelling 1..d in every colour.

    Applying the same permutation of labels 1..d to colours 1..d permutes the
    rows ``ii..i`` and fixes the base transversal and every ``x0..0``.
    """
    seen = set()
    reps = []
    for rows in itertools.combinations(range(1, d + 1), b):
        canon = min(tuple(sorted(p[r - 1] + 1 for r in rows))
                    for p in itertools.permutations(range(d)))
        if canon not in seen:
            seen.add(canon)
            reps.append(canon)
    return reps


@lru_cache(maxsize=None)
def table_family(d: int, row: int, column: int) -> tuple[int, ...]:
    """Edges that flip small-table entry (row, column), except the fixed ``column 0..0``."""
    out = []
    for pattern in itertools.product((0, row), repeat=d):
        if any(pattern):
            out.append(encode_edge((column,) + pattern))
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def symmetric_table_family(d: int, row: int, column: int) -> tuple[tuple[int, tuple[int, ...]], ...]:
    """Representatives ``column, row^m, 0^(d-m)`` for m = 1..d, each forbidding lighter family edges.

    If a system contains a family edge, permuting colours 1..d moves its lightest
    family edge to the representative of that weight.
    """
    family = [decode_edge(c, Shape(d)) for c in table_family(d, row, column)]
    out = []
    for m in range(1, d + 1):
        rep = (column,) + (row,) * m + (0,) * (d - m)
        lighter = tuple(sorted(encode_edge(e) for e in family
                               if sum(1 for x in e[1:] if x) < m))
        out.append((encode_edge(rep), lighter))
    return tuple(out)


@lru_cache(maxsize=None)
def point_family(d: int, colour: int, label: int) -> tuple[int, ...]:
    n = d + 1
    out = []
    for rest in itertools.product(range(n), repeat=d):
        out.append(encode_edge(rest[:colour] + (label,) + rest[colour:]))
    return tuple(sorted(out))


def parity_family(d: int, colour: int, row: int, apexes: Sequence[int]) -> list[int]:
    """Edges of the octahedron (0..0, row) of ``colour`` with apex in ``apexes``."""
    u = []
    r = row
    for _ in range(d):
        r, x = divmod(r, d)
        u.append(x + 1)
    u.reverse()
    out = []
    for rest in itertools.product(*[(0, x) for x in u]):
        for a in apexes:
            out.append(encode_edge(rest[:colour] + (a,) + rest[colour:]))
    return sorted(out)


@dataclass
class Statistics:
    nodes: int = 0
    leaves: int = 0
    dead_ends: int = 0
    max_depth: int = 0
    prunes: dict[str, int] = field(default_factory=lambda: dict.fromkeys(PRUNE_REASONS, 0))
    branches: dict[str, int] = field(default_factory=lambda: dict.fromkeys(BRANCH_KINDS, 0))
    wall_time: float = 0.0

    def merge(self, other: Statistics) -> None:
        self.nodes += other.nodes
        self.leaves += other.leaves
        self.dead_ends += other.dead_ends
        self.max_depth = max(self.max_depth, other.max_depth)
        for k, v in other.prunes.items():
            self.prunes[k] = self.prunes.get(k, 0) + v
        for k, v in other.branches.items():
            self.branches[k] = self.branches.get(k, 0) + v
        self.wall_time += other.wall_time

    def deterministic(self) -> dict[str, Any]:
        out = asdict(self)
        del out["wall_time"]
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Statistics:
        s = cls()
        s.nodes = int(data["nodes"])
        s.leaves = int(data["leaves"])
        s.dead_ends = int(data["dead_ends"])
        s.max_depth = int(data["max_depth"])
        s.prunes.update({k: int(v) for k, v in data["prunes"].items()})
        s.branches.update({k: int(v) for k, v in data["branches"].items()})
        s.wall_time = float(data.get("wall_time", 0.0))
        return s

    def copy(self) -> Statistics:
        return Statistics.from_dict(asdict(self))


@dataclass(frozen=True)
class Budget:
    node_limit: int | None = None
    time_limit: float | None = None


@dataclass(frozen=True)
class SearchOptions:
    symmetry: bool = True
    targeted: bool = True


@dataclass
class Checkpoint:
    d: int
    case: CaseParams
    odd_rows: tuple[int, ...]
    options: SearchOptions
    trail: list[int]
    statistics: Statistics

    def to_json(self) -> dict[str, Any]:
        return {
            "format": CHECKPOINT_FORMAT,
            "version": __version__,
            "d": self.d,
            "case": asdict(self.case),
            "odd_rows": list(self.odd_rows),
            "options": asdict(self.options),
            "trail": list(self.trail),
            "statistics": asdict(self.statistics),
        }

    @classmethod
    def from_json(cls, data: Any) -> Checkpoint:
        try:
            if data.get("format") != CHECKPOINT_FORMAT:
                raise CheckpointError(f"unknown checkpoint format {data.get('format')!r}")
            d = int(data["d"])
            case = CaseParams(**{k: int(v) for k, v in data["case"].items()})
            odd = tuple(int(r) for r in data["odd_rows"])
            opts = SearchOptions(**{k: bool(v) for k, v in data["options"].items()})
            trail = [int(x) for x in data["trail"]]
            stats = Statistics.from_dict(data["statistics"])
        except CheckpointError:
            raise
        except (AttributeError, KeyError, TypeError, ValueError) as exc:
            raise CheckpointError(f"corrupt checkpoint: {exc}") from None
        if any(x < 0 for x in trail):
            raise CheckpointError("corrupt checkpoint: negative trail entry")
        return cls(d, case, odd, opts, trail, stats)

    def dump(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> Checkpoint:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CheckpointError(f"corrupt checkpoint {path}: {exc}") from None
        return cls.from_json(data)


@dataclass
class Certificate:
    d: int
    case: CaseParams
    odd_rows: tuple[int, ...]
    outcome: str
    statistics: Statistics
    witness: EdgeSet | None = None
    checkpoint: Checkpoint | None = None
    options: SearchOptions = SearchOptions()

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "format": CERTIFICATE_FORMAT,
            "version": __version__,
            "d": self.d,
            "case": asdict(self.case),
            "odd_rows": list(self.odd_rows),
            "options": asdict(self.options),
            "outcome": self.outcome,
            "statistics": asdict(self.statistics),
        }
        if self.witness is not None:
            out["witness"] = [list(e) for e in self.witness]
        if self.checkpoint is not None:
            out["checkpoint"] = self.checkpoint.to_json()
        return out

    @classmethod
    def from_json(cls, data: Any) -> Certificate:
        try:
            if data.get("format") != CERTIFICATE_FORMAT:
                raise CheckpointError(f"unknown certificate format {data.get('format')!r}")
            d = int(data["d"])
            case = CaseParams(**{k: int(v) for k, v in data["case"].items()})
            outcome = data["outcome"]
            if outcome not in (EXHAUSTED, WITNESS, BUDGET_EXCEEDED):
                raise CheckpointError(f"unknown outcome {outcome!r}")
            witness = None
            if "witness" in data:
                witness = EdgeSet(Shape(d), [tuple(int(x) for x in e) for e in data["witness"]])
            checkpoint = Checkpoint.from_json(data["checkpoint"]) if "checkpoint" in data else None
            return cls(d, case, tuple(int(r) for r in data["odd_rows"]), outcome,
                       Statistics.from_dict(data["statistics"]), witness, checkpoint,
                       SearchOptions(**{k: bool(v) for k, v in data["options"].items()}))
        except CheckpointError:
            raise
        except (AttributeError, KeyError, TypeError, ValueError) as exc:
            raise CheckpointError(f"corrupt certificate: {exc}") from None


def realized_params(h: EdgeSet) -> tuple[int, tuple[int, ...], int]:
    """(l, odd small-table rows, j) of ``h`` relative to colour 0 and the base transversal."""
    d = h.shape.d
    l = sum(1 for e in h if not any(e[1:]))
    small = small_table_of(LargeTable.build(h))
    odd = tuple(i for i, row in enumerate(small.rows, start=1) if all(row))
    j = min(h.incidence((0, x)) for x in range(d + 1))
    return l, odd, j


def verify_witness(h: EdgeSet, case: CaseParams, odd_rows: Sequence[int]) -> list[str]:
    """Problems with a claimed witness, checked from scratch; empty when it is valid."""
    problems = []
    if has_isolated_vertex(h) is not None:
        problems.append(f"isolated vertex {has_isolated_vertex(h)}")
    verdict = is_octahedral_system(h)
    if not verdict:
        problems.append(f"octahedron {verdict.counterexample} violates parity")
    if len(h) > case.target:
        problems.append(f"{len(h)} edges exceed target {case.target}")
    small = small_table_of(LargeTable.build(h))
    if small_table_mismatches(small, case.b, odd_rows):
        problems.append("small table does not match the designated parities")
    l, _, j = realized_params(h)
    if (l, j) != (case.l, case.j):
        problems.append(f"realized (l, j) = {(l, j)} differs from {(case.l, case.j)}")
    return problems


class _Frame:
    __slots__ = ("children", "exclusive", "next", "current", "kind")

    def __init__(self, children: list[tuple[int, tuple[int, ...]]], exclusive: bool, kind: str) -> None:
        self.children = children
        self.exclusive = exclusive
        self.kind = kind
        self.next = 0
        self.current = -1


class _Found(Exception):
    pass


class Engine:
    """Mutable search state with make/unmake moves."""

    def __init__(self, d: int, case: CaseParams, odd_rows: Sequence[int] | None = None,
                 options: SearchOptions = SearchOptions()) -> None:
        case.validate(d)
        self.d = d
        self.shape = Shape(d)
        self.case = case
        self.odd_rows = tuple(odd_rows) if odd_rows is not None else odd_row_designations(d, case.b)[0]
        if len(self.odd_rows) != case.b:
            raise ValueError(f"odd rows {self.odd_rows} do not have {case.b} members")
        self.options = options
        self.space = edge_space(d)
        n = d + 1
        self.n = n
        self.present = 0
        self.edges: list[int] = []
        self.forb = bytearray(self.shape.num_edges)
        self.inc = [[0] * n for _ in range(n)]
        self.nbr = [0] * self.shape.num_edges
        self.tables = [LargeTable(self.shape, i, debug=False) for i in range(n)]
        self.small_rows = small_row_indices(d)
        self.want = [1 if r in self.odd_rows else 0 for r in range(1, d + 1)]
        self.small_target = case.target <= d * d
        self.stats = Statistics()
        self.witness: EdgeSet | None = None
        base = [encode_edge((x,) + (0,) * d) for x in range(n)]
        for x in range(case.l):
            self.add(base[x])
        for x in range(case.l, n):
            self.forb[base[x]] += 1

    # moves

    def add(self, code: int) -> None:
        self.present |= 1 << code
        self.edges.append(code)
        e = self.space.edges[code]
        inc = self.inc
        for i, x in enumerate(e):
            inc[i][x] += 1
        nbr = self.nbr
        for c in self.space.neighbours[code]:
            nbr[c] += 1
        for t in self.tables:
            t.toggle(code)

    def remove(self, code: int) -> None:
        self.present &= ~(1 << code)
        if self.edges[-1] == code:
            self.edges.pop()
        else:
            self.edges.remove(code)
        e = self.space.edges[code]
        inc = self.inc
        for i, x in enumerate(e):
            inc[i][x] -= 1
        nbr = self.nbr
        for c in self.space.neighbours[code]:
            nbr[c] -= 1
        for t in self.tables:
            t.toggle(code)

    # queries

    def edge_set(self) -> EdgeSet:
        return EdgeSet.from_codes(self.shape, sorted(self.edges))

    def forbidden(self) -> frozenset[int]:
        return frozenset(i for i, v in enumerate(self.forb) if v)

    def first_mismatch(self) -> tuple[int, int] | None:
        cols = self.tables[0].cols
        for r, idx in enumerate(self.small_rows):
            want = self.want[r]
            for c, col in enumerate(cols):
                if (col >> idx & 1) != want:
                    return r + 1, c
        return None

    def mismatches(self) -> list[tuple[int, int]]:
        return small_table_mismatches(small_table_of(self.tables[0]), self.case.b, self.odd_rows)

    def first_isolated(self) -> int | None:
        nbr = self.nbr
        best = None
        for c in self.edges:
            if nbr[c] == 0 and (best is None or c < best):
                best = c
        return best

    def prune_reason(self) -> str | None:
        case = self.case
        inc0 = self.inc[0]
        if min(inc0) > case.j:
            return "subcase"
        k = max(sum(1 for v in row if v == 0) for row in self.inc)
        k2 = sum(case.j - v for v in inc0 if v < case.j)
        if len(self.edges) + max(k, k2) > case.target:
            return "uncovered" if k >= k2 else "undercount"
        return None

    def is_leaf(self) -> bool:
        if len(self.edges) > self.case.target:
            return False
        if any(t.score for t in self.tables):
            return False
        if any(v == 0 for row in self.inc for v in row):
            return False
        if min(self.inc[0]) != self.case.j:
            return False
        return self.first_mismatch() is None

    # branching

    def _open(self, codes: Iterable[int]) -> list[tuple[int, tuple[int, ...]]]:
        present, forb = self.present, self.forb
        return [(c, ()) for c in codes if not (present >> c & 1) and not forb[c]]

    def table_children(self, mismatch: tuple[int, int], symmetric: bool) -> list[tuple[int, tuple[int, ...]]]:
        row, column = mismatch
        if symmetric:
            present, forb = self.present, self.forb
            return [(c, extra) for c, extra in symmetric_table_family(self.d, row, column)
                    if not (present >> c & 1) and not forb[c]]
        return self._open(table_family(self.d, row, column))

    def isolated_children(self, code: int) -> list[tuple[int, tuple[int, ...]]]:
        return self._open(self.space.neighbours[code])

    def parity_children(self) -> list[tuple[int, tuple[int, ...]]] | None:
        for colour, t in enumerate(self.tables):
            if not t.score:
                continue
            bad = t.nonconstant_rows()
            row = (bad & -bad).bit_length() - 1
            bits = t.row_bits(row)
            other = next(c for c in range(1, self.n) if bits[c] != bits[0])
            return self._open(parity_family(self.d, colour, row, (0, other)))
        return None

    def cover_children(self) -> list[tuple[int, tuple[int, ...]]] | None:
        for colour, row in enumerate(self.inc):
            for label, v in enumerate(row):
                if v == 0:
                    return self._open(point_family(self.d, colour, label))
        for label, v in enumerate(self.inc[0]):
            if v < self.case.j:
                return self._open(point_family(self.d, 0, label))
        return None

    def free_children(self) -> list[tuple[int, tuple[int, ...]]]:
        return self._open(range(self.shape.num_edges))

    def expand(self, depth: int, count: bool = True) -> tuple[str, list[tuple[int, tuple[int, ...]]]] | None:
        """Children of the current node, or None for a leaf, cut or dead end."""
        stats = self.stats
        if count:
            stats.nodes += 1
            if depth > stats.max_depth:
                stats.max_depth = depth
        reason = self.prune_reason()
        if reason is not None:
            if count:
                stats.prunes[reason] += 1
            return None
        room = len(self.edges) < self.case.target
        mismatch = self.first_mismatch()
        if mismatch is not None:
            if not room:
                if count:
                    stats.dead_ends += 1
                return None
            symmetric = self.options.symmetry and depth == 0
            return "table", self.table_children(mismatch, symmetric)
        if self.small_target:
            iso = self.first_isolated()
            if iso is not None:
                if not room:
                    if count:
                        stats.dead_ends += 1
                    return None
                return "isolated", self.isolated_children(iso)
        if count:
            stats.leaves += 1
        if self.is_leaf():
            raise _Found
        if not room:
            if count:
                stats.dead_ends += 1
            return None
        if self.options.targeted:
            kids = self.parity_children()
            if kids is not None:
                return "parity", kids
            kids = self.cover_children()
            if kids is not None:
                return "cover", kids
        return "free", self.free_children()

    def _enter(self, frame: _Frame, index: int) -> None:
        code, extra = frame.children[index]
        for c in extra:
            self.forb[c] += 1
        self.add(code)
        frame.current = index
        frame.next = index + 1

    def _leave(self, frame: _Frame) -> None:
        code, extra = frame.children[frame.current]
        self.remove(code)
        for c in extra:
            self.forb[c] -= 1
        if frame.exclusive:
            self.forb[code] += 1
        frame.current = -1

    def _close(self, frame: _Frame) -> None:
        if frame.exclusive:
            for code, _ in frame.children[:frame.next]:
                self.forb[code] -= 1

    def _push(self, frames: list[_Frame], result: tuple[str, list] | None, depth: int,
              count: bool = True) -> None:
        if result is None:
            return
        kind, kids = result
        symmetric_root = kind == "table" and depth == 0 and self.options.symmetry
        if count:
            self.stats.branches[kind] += 1
        frames.append(_Frame(kids, exclusive=not symmetric_root, kind=kind))

    def replay(self, trail: Sequence[int]) -> list[_Frame]:
        """Rebuild the frame stack for ``trail`` without touching statistics."""
        frames: list[_Frame] = []
        saved = self.stats
        self.stats = Statistics()
        try:
            for depth, index in enumerate(trail):
                result = self.expand(depth, count=False)
                if result is None:
                    raise CheckpointError(f"trail leaves the search tree at depth {depth}")
                self._push(frames, result, depth, count=False)
                frame = frames[-1]
                last = depth == len(trail) - 1
                limit = len(frame.children) if last else len(frame.children) - 1
                if not 0 <= index <= limit:
                    raise CheckpointError(f"trail index {index} out of range at depth {depth}")
                if frame.exclusive:
                    for code, _ in frame.children[:index]:
                        self.forb[code] += 1
                frame.next = index
                if not last:
                    self._enter(frame, index)
        except _Found:
            raise CheckpointError("trail passes through a leaf") from None
        finally:
            self.stats = saved
        return frames

    def _over(self, limit: int | None, deadline: float | None) -> bool:
        if limit is not None and self.stats.nodes >= limit:
            return True
        return deadline is not None and time.monotonic() > deadline

    def _walk(self, frames: list[_Frame], floor: int, limit: int | None,
              deadline: float | None) -> tuple[str, list[int] | None]:
        while len(frames) > floor:
            frame = frames[-1]
            if frame.current >= 0:
                self._leave(frame)
            if frame.next >= len(frame.children):
                self._close(frame)
                frames.pop()
                continue
            if self._over(limit, deadline):
                return BUDGET_EXCEEDED, [f.current for f in frames[:-1]] + [frame.next]
            self._enter(frame, frame.next)
            self._push(frames, self.expand(len(frames)), len(frames))
        return EXHAUSTED, None

    def _timed(self, budget: Budget, body) -> tuple[str, list[int] | None]:
        start = time.monotonic()
        deadline = None if budget.time_limit is None else start + budget.time_limit
        try:
            return body(budget.node_limit, deadline)
        except _Found:
            self.witness = self.edge_set()
            return WITNESS, None
        finally:
            self.stats.wall_time += time.monotonic() - start

    def run(self, budget: Budget = Budget(), trail: Sequence[int] = (),
            floor: int = 0) -> tuple[str, list[int] | None]:
        """Depth-first search from ``trail``; returns (outcome, checkpoint trail).

        ``budget.node_limit`` is compared with the cumulative node count.  With
        ``floor`` > 0 the walk stops instead of backtracking above that depth.
        """
        def body(limit, deadline):
            if trail:
                frames = self.replay(trail)
            else:
                if self._over(limit, deadline):
                    return BUDGET_EXCEEDED, []
                frames = []
                self._push(frames, self.expand(0), 0)
            return self._walk(frames, floor, limit, deadline)
        return self._timed(budget, body)

    def run_subtree(self, index: int, budget: Budget = Budget()) -> tuple[str, list[int] | None]:
        """Search only below root child ``index``; the root itself is not counted."""
        def body(limit, deadline):
            frames = self.replay([index])
            if self._over(limit, deadline):
                return BUDGET_EXCEEDED, [index]
            self._enter(frames[0], index)
            self._push(frames, self.expand(1), 1)
            return self._walk(frames, 1, limit, deadline)
        return self._timed(budget, body)

    def root_children(self) -> int:
        probe = Engine(self.d, self.case, self.odd_rows, self.options)
        try:
            result = probe.expand(0, count=False)
        except _Found:
            return 0
        return 0 if result is None else len(result[1])


def normalize_initial(d: int, case: CaseParams, odd_rows: Sequence[int] | None = None) -> SearchNode:
    eng = Engine(d, case, odd_rows)
    return SearchNode.from_engine(eng, depth=0, trail=())


@dataclass(frozen=True)
class SearchNode:
    """Snapshot of a search state for step-by-step use of the branching rules."""

    case: CaseParams
    odd_rows: tuple[int, ...]
    partial: EdgeSet
    forbidden: frozenset[int]
    tables: tuple[LargeTable, ...]
    depth: int
    trail: tuple[int, ...]

    @classmethod
    def from_engine(cls, eng: Engine, depth: int, trail: tuple[int, ...]) -> SearchNode:
        return cls(eng.case, eng.odd_rows, eng.edge_set(), eng.forbidden(),
                   tuple(t.copy() for t in eng.tables), depth, trail)

    @classmethod
    def of(cls, d: int, case: CaseParams, edges: Iterable[Sequence[int]],
           forbidden: Iterable[Sequence[int]] = (), odd_rows: Sequence[int] | None = None) -> SearchNode:
        """A node with an arbitrary partial system, mainly for inspection."""
        shape = Shape(d)
        partial = EdgeSet(shape, [tuple(e) for e in edges])
        rows = tuple(odd_rows) if odd_rows is not None else odd_row_designations(d, case.b)[0]
        tables = tuple(LargeTable.build(partial, i) for i in range(d + 1))
        return cls(case, rows, partial, frozenset(encode_edge(tuple(e)) for e in forbidden),
                   tables, 0, ())

    @property
    def shape(self) -> Shape:
        return self.partial.shape

    @property
    def large_table(self) -> LargeTable:
        return self.tables[0]

    @property
    def phase(self) -> str:
        eng = self.engine()
        if eng.first_mismatch() is not None:
            return "table-repair"
        if eng.small_target and eng.first_isolated() is not None:
            return "isolated-repair"
        return "free"

    def engine(self, options: SearchOptions = SearchOptions()) -> Engine:
        d = self.shape.d
        eng = Engine(d, self.case, self.odd_rows, options)
        for c in eng.edges[:]:
            eng.remove(c)
        eng.forb = bytearray(self.shape.num_edges)
        for c in self.forbidden:
            eng.forb[c] = 1
        for c in self.partial.codes():
            eng.add(c)
        return eng

    def child(self, code: int, forbid: Iterable[int], index: int) -> SearchNode:
        eng = self.engine()
        for c in forbid:
            eng.forb[c] = 1
        eng.add(code)
        return SearchNode.from_engine(eng, self.depth + 1, self.trail + (index,))

    def _children(self, kids: list[tuple[int, tuple[int, ...]]], exclusive: bool) -> list[SearchNode]:
        out = []
        for i, (code, extra) in enumerate(kids):
            earlier = [c for c, _ in kids[:i]] if exclusive else []
            out.append(self.child(code, list(extra) + earlier, i))
        return out


def branch_table_fix(node: SearchNode, mismatch: tuple[int, int], symmetric: bool = False) -> list[SearchNode]:
    eng = node.engine()
    return node._children(eng.table_children(mismatch, symmetric), exclusive=not symmetric)


def branch_isolated(node: SearchNode) -> list[SearchNode]:
    eng = node.engine()
    iso = eng.first_isolated()
    if iso is None:
        raise ValueError("node has no isolated edge")
    return node._children(eng.isolated_children(iso), exclusive=True)


def branch_free(node: SearchNode) -> list[SearchNode]:
    if len(node.partial) >= node.case.target:
        return []
    eng = node.engine()
    return node._children(eng.free_children(), exclusive=True)


def prune(node: SearchNode) -> str | None:
    """Reason to cut the node, or None to keep it."""
    return node.engine().prune_reason()


def _unit(args: tuple) -> tuple[str, list[int] | None, dict[str, Any], list[int] | None]:
    d, case, odd_rows, options, index, node_limit = args
    eng = Engine(d, case, odd_rows, options)
    outcome, trail = eng.run_subtree(index, Budget(node_limit))
    witness = sorted(eng.edges) if outcome == WITNESS else None
    return outcome, trail, asdict(eng.stats), witness


def run_case(
    d: int,
    case: CaseParams,
    budget: Budget = Budget(),
    options: SearchOptions = SearchOptions(),
    resume: Checkpoint | None = None,
    jobs: int = 1,
    odd_rows: Sequence[int] | None = None,
) -> Certificate:
    """Search one case to exhaustion, a witness, or the budget.

    ``budget.node_limit`` counts all nodes, including those before a resumed
    checkpoint.  With a node budget only, results do not depend on ``jobs``.
    """
    if resume is not None:
        if resume.d != d or resume.case != case or resume.options != options:
            raise CheckpointError("checkpoint belongs to a different search")
        odd_rows = resume.odd_rows
    eng = Engine(d, case, odd_rows, options)
    if resume is not None:
        eng.stats = resume.statistics.copy()
    trail = list(resume.trail) if resume is not None else []
    if jobs > 1 and budget.time_limit is None:
        return _run_parallel(eng, budget, trail, jobs)
    outcome, cp_trail = eng.run(budget, trail)
    return _certificate(eng, outcome, cp_trail)


def _certificate(eng: Engine, outcome: str, cp_trail: list[int] | None) -> Certificate:
    checkpoint = None
    witness = None
    if outcome == BUDGET_EXCEEDED:
        checkpoint = Checkpoint(eng.d, eng.case, eng.odd_rows, eng.options, list(cp_trail or []),
                                eng.stats.copy())
    if outcome == WITNESS:
        witness = eng.witness
        problems = verify_witness(witness, eng.case, eng.odd_rows)
        if problems:
            raise AssertionError(f"search produced an invalid witness: {problems}")
    return Certificate(eng.d, eng.case, eng.odd_rows, outcome, eng.stats, witness,
                       checkpoint, eng.options)


def _run_parallel(eng: Engine, budget: Budget, trail: list[int], jobs: int) -> Certificate:
    # Root subtrees run in workers with the whole remaining budget and are merged
    # in order.  One that overruns its sequential share is rerun locally with the
    # cumulative limit, so outcome and statistics match a sequential run.
    limit = budget.node_limit
    if len(trail) >= 2:
        outcome, cp = eng.run(budget, trail, floor=1)
        if outcome != EXHAUSTED:
            return _certificate(eng, outcome, cp)
        start = trail[0] + 1
    elif trail:
        start = trail[0]
    else:
        if limit is not None and eng.stats.nodes >= limit:
            return _certificate(eng, BUDGET_EXCEEDED, [])
        try:
            root = eng.expand(0)
        except _Found:
            eng.witness = eng.edge_set()
            return _certificate(eng, WITNESS, None)
        if root is None:
            return _certificate(eng, EXHAUSTED, None)
        eng.stats.branches[root[0]] += 1
        start = 0
    indices = list(range(start, eng.root_children()))
    if not indices:
        return _certificate(eng, EXHAUSTED, None)
    d, case, odd, opts = eng.d, eng.case, eng.odd_rows, eng.options
    spare = None if limit is None else max(0, limit - eng.stats.nodes)
    args = [(d, case, odd, opts, i, spare) for i in indices]
    # Leaving the pool terminates workers still busy with units no longer needed.
    with multiprocessing.Pool(jobs) as pool:
        for i, result in zip(indices, pool.imap(_unit, args)):
            outcome, cp, raw, witness = result
            unit_stats = Statistics.from_dict(raw)
            remaining = None if limit is None else limit - eng.stats.nodes
            exact = remaining is None or unit_stats.nodes < remaining or (
                outcome != BUDGET_EXCEEDED and unit_stats.nodes == remaining) or spare == remaining
            if not exact:
                sub = Engine(d, case, odd, opts)
                sub.stats = eng.stats.copy()
                outcome, cp = sub.run_subtree(i, Budget(limit))
                if outcome != EXHAUSTED:
                    return _certificate(sub, outcome, cp)
                eng.stats = sub.stats
                continue
            eng.stats.merge(unit_stats)
            if outcome == WITNESS:
                eng.witness = EdgeSet.from_codes(eng.shape, witness)
                return _certificate(eng, WITNESS, None)
            if outcome == BUDGET_EXCEEDED:
                return _certificate(eng, BUDGET_EXCEEDED, cp)
    return _certificate(eng, EXHAUSTED, None)


@dataclass
class BoundReport:
    d: int
    target: int
    certificates: list[Certificate]

    @property
    def proven(self) -> bool:
        return all(c.outcome == EXHAUSTED for c in self.certificates)

    @property
    def witnesses(self) -> list[EdgeSet]:
        return [c.witness for c in self.certificates if c.witness is not None]

    @property
    def pending(self) -> list[CaseParams]:
        return [c.case for c in self.certificates if c.outcome == BUDGET_EXCEEDED]

    def summary(self) -> str:
        if self.proven:
            return f"nu({self.d}) >= {self.target + 1}"
        if self.witnesses:
            size = min(len(w) for w in self.witnesses)
            return f"witness of size {size} found, so no bound above {size} holds"
        return f"undecided: {len(self.pending)} case(s) exceeded the budget"

    def to_json(self) -> dict[str, Any]:
        return {
            "format": REPORT_FORMAT,
            "version": __version__,
            "d": self.d,
            "target": self.target,
            "proven": self.proven,
            "summary": self.summary(),
            "cases": [c.to_json() for c in self.certificates],
        }

    @classmethod
    def from_json(cls, data: Any) -> BoundReport:
        try:
            if data.get("format") != REPORT_FORMAT:
                raise CheckpointError(f"unknown report format {data.get('format')!r}")
            certs = [Certificate.from_json(c) for c in data["cases"]]
            return cls(int(data["d"]), int(data["target"]), certs)
        except CheckpointError:
            raise
        except (AttributeError, KeyError, TypeError, ValueError) as exc:
            raise CheckpointError(f"corrupt report: {exc}") from None


def prove_bound(
    d: int,
    target: int,
    budget: Budget = Budget(),
    options: SearchOptions = SearchOptions(),
    jobs: int = 1,
    cases: Sequence[CaseParams] | None = None,
    resume: BoundReport | None = None,
) -> BoundReport:
    """Run every case for ``target``; the bound holds only if every case is exhausted.

    The budget applies to each case separately.  With ``resume``, finished cases
    are kept and budget-exceeded ones continue from their checkpoints.
    """
    if cases is None:
        cases = generate_cases(d, target)
    done: dict[CaseParams, Certificate] = {}
    if resume is not None:
        if (resume.d, resume.target) != (d, target):
            raise CheckpointError("report belongs to a different search")
        done = {c.case: c for c in resume.certificates}
    certs = []
    for case in cases:
        prev = done.get(case)
        if prev is not None and prev.outcome != BUDGET_EXCEEDED:
            certs.append(prev)
            continue
        cp = prev.checkpoint if prev is not None else None
        opts = cp.options if cp is not None else options
        certs.append(run_case(d, case, budget, opts, resume=cp, jobs=jobs))
    return BoundReport(d, target, certs)


__all__ = [
    "BoundReport", "Budget", "CaseParams", "Certificate", "Checkpoint", "CheckpointError",
    "Engine", "SearchNode", "SearchOptions", "Statistics", "branch_free", "branch_isolated",
    "branch_table_fix", "case_lower_bound", "generate_cases", "normalize_initial",
    "odd_row_designations", "prove_bound", "prune", "run_case",
]
