"""Acceptance suite, one test per criterion.

Each test tags itself with ``record_property("criterion", n)``; the conftest
prints a PASS/FAIL line per criterion in the terminal summary.  The suite runs
after every other test module so that criterion 7 sees every system recorded
by the rest of the run.
"""

import json
import random
import time

import pytest

from octasys.cli import main
from octasys.core import EdgeSet, Shape, decode_edge, zeros
from octasys.geometry import configuration_hypergraph, random_configuration
from octasys.oracle import brute_force_min_size, octahedral_systems
from octasys.search import (
    BUDGET_EXCEEDED,
    Budget,
    CaseParams,
    Checkpoint,
    generate_cases,
    normalize_initial,
    prove_bound,
    run_case,
    verify_witness,
)
from octasys.tables import LargeTable, build_large_table, colour_tables, small_table_of
from octasys.verifier import (
    has_isolated_vertex,
    is_octahedral_system,
    isolated_edges,
    octahedron_parity,
    report,
)

from conftest import SEEN_SYSTEMS, check_system

TABLE_1 = ((1, 1, 1, 0, 0),) * 4


@pytest.fixture
def criterion(record_property):
    def tag(number, label):
        record_property("criterion", number)
        record_property("label", label)
    return tag


class Clock:
    def __init__(self, limit):
        self.limit = limit
        self.t0 = time.monotonic()

    def check(self):
        elapsed = time.monotonic() - self.t0
        assert elapsed < self.limit, f"took {elapsed:.1f}s, limit {self.limit}s"


def test_criterion_01_score_formula(criterion):
    criterion(1, "score of the single all-zero edge is d^(d+1) for d = 2, 3, 4")
    clock = Clock(1)
    for d, expected in ((2, 8), (3, 81), (4, 1024)):
        shape = Shape(d)
        h = EdgeSet(shape)
        h.add((0,) * (d + 1))
        assert LargeTable.build(h).score == expected == d ** (d + 1)
    clock.check()


def test_criterion_02_table_1(criterion, capsys):
    criterion(2, "small table after normalisation with l=3 at d=4 matches the reference table (rows 1 1 1 0 0)")
    clock = Clock(1)
    node = normalize_initial(4, CaseParams(3, 4, 2, 13))
    assert small_table_of(node.tables[0]).rows == TABLE_1
    assert main(["table", "--d", "4", "--l", "3"]) == 0
    printed = [line.split() for line in capsys.readouterr().out.splitlines()
               if line.startswith("*")]
    assert [tuple(int(x) for x in row[2:]) for row in printed] == list(TABLE_1)
    clock.check()


def test_criterion_03_case_generation(criterion):
    criterion(3, "generate_cases(4, 13) lists exactly (3,4,2), (3,4,1), (3,3,2), (2,3,2)")
    got = [c.triple for c in generate_cases(4, 13)]
    assert sorted(got) == sorted([(3, 4, 2), (3, 4, 1), (3, 3, 2), (2, 3, 2)])
    assert len(got) == len(set(got))


def test_criterion_04_maximal_system(criterion):
    criterion(4, "the all-edges systems at d = 2 and 3 satisfy both properties")
    clock = Clock(10)
    for d, size in ((2, 27), (3, 256)):
        h = EdgeSet.full(Shape(d))
        assert len(h) == size
        assert has_isolated_vertex(h) is None
        assert is_octahedral_system(h)
        assert all(t.score == 0 for t in colour_tables(h))
    clock.check()


def test_criterion_05_geometry(criterion, system_check):
    criterion(5, "random configurations give octahedral systems; d=2 counts >= 5, d=3 >= 10 and even")
    clock = Clock(300)
    for d, trials, floor in ((2, 100, 5), (3, 20, 10)):
        for seed in range(trials):
            c = random_configuration(Shape(d), seed)
            h = configuration_hypergraph(c, validate=True)
            assert has_isolated_vertex(h) is None
            system_check(h)
            assert len(h) >= floor
            if d % 2:
                assert len(h) % 2 == 0
    clock.check()


def test_criterion_06_score_update_bound(criterion):
    criterion(6, "10^4 single-edge updates change the score by at most d^z(e), incremental = rebuild")
    clock = Clock(300)
    trials = 0
    for d, rounds in ((2, 3400), (3, 3300), (4, 3300)):
        rng = random.Random(1000 + d)
        shape = Shape(d)
        h = EdgeSet(shape)
        t = LargeTable(shape)
        for _ in range(rounds):
            code = rng.randrange(shape.num_edges)
            e = decode_edge(code, shape)
            old = t.score
            if h.has_code(code):
                h.remove_code(code)
                t.apply(e, "remove")
            else:
                h.add_code(code)
                t.apply(e, "add")
            assert abs(t.score - old) <= d ** zeros(e)
            trials += 1
            if trials % 97 == 0:
                assert t == build_large_table(h)
        assert t == build_large_table(h)
    assert trials == 10_000
    clock.check()


def test_criterion_07_no_isolated_edge(criterion):
    criterion(7, "no octahedral system of at most d^2 edges without isolated vertex has an isolated edge")
    assert SEEN_SYSTEMS, "the rest of the suite recorded no systems"
    for h in SEEN_SYSTEMS:
        if len(h) <= h.shape.d ** 2 and has_isolated_vertex(h) is None:
            assert is_octahedral_system(h)
            assert isolated_edges(h) == []
    # Exhaustive at d=2: there is no such system at all, so the statement holds vacuously.
    shape = Shape(2)
    assert list(octahedral_systems(shape, shape.d ** 2)) == []
    assert not brute_force_min_size(shape, shape.d ** 2).found


def test_criterion_08_oracle_equivalence(criterion):
    criterion(8, "oracle and prove_bound agree at d=2 for every target <= 6, and N2 <= 5")
    clock = Clock(1800)
    shape = Shape(2)
    first_size = None
    for target in range(0, 7):
        oracle = brute_force_min_size(shape, target)
        rep = prove_bound(2, target)
        assert not rep.pending
        assert rep.proven == (not oracle.found)
        for cert in rep.certificates:
            if cert.witness is not None:
                assert verify_witness(cert.witness, cert.case, cert.odd_rows) == []
                check_system(cert.witness)
        if oracle.found and first_size is None:
            first_size = oracle.size
            check_system(oracle.witness)
    assert first_size is not None and first_size <= 5
    clock.check()


@pytest.mark.slow
def test_criterion_09_d4_budgeted(criterion):
    criterion(9, "d=4 case (3,4,2) with a 10^6-node budget: no witness, deterministic, resumable")
    clock = Clock(7200)
    case = CaseParams(3, 4, 2, 13)
    budget = Budget(1_000_000)
    first = run_case(4, case, budget)
    assert first.witness is None
    assert first.outcome == BUDGET_EXCEEDED
    assert first.statistics.nodes == 1_000_000
    second = run_case(4, case, budget)
    parallel = run_case(4, case, budget, jobs=2)
    for other in (second, parallel):
        assert other.witness is None
        assert other.outcome == first.outcome
        assert other.statistics.deterministic() == first.statistics.deterministic()
        assert other.checkpoint.trail == first.checkpoint.trail
    part = run_case(4, case, Budget(400_000))
    saved = Checkpoint.from_json(json.loads(json.dumps(part.checkpoint.to_json())))
    resumed = run_case(4, case, budget, resume=saved)
    assert resumed.statistics.deterministic() == first.statistics.deterministic()
    assert resumed.checkpoint.trail == first.checkpoint.trail
    clock.check()


def passing_systems():
    out = [EdgeSet.full(Shape(2)), EdgeSet.full(Shape(3))]
    out.append(brute_force_min_size(Shape(2), 5).witness)
    for target in (5, 6):
        out += [c.witness for c in prove_bound(2, target).certificates if c.witness is not None]
    for d, seeds in ((2, range(5)), (3, range(5))):
        for seed in seeds:
            out.append(configuration_hypergraph(random_configuration(Shape(d), seed)))
    return out


def test_criterion_10_red_team(criterion):
    criterion(10, "10^3 single-edge flips of passing systems are never accepted silently")
    clock = Clock(300)
    pool = passing_systems()
    for h in pool:
        assert report(h).holds
    rng = random.Random(2024)
    for trial in range(1000):
        base = pool[trial % len(pool)]
        h = base.copy()
        code = rng.randrange(h.shape.num_edges)
        if h.has_code(code):
            h.remove_code(code)
        else:
            h.add_code(code)
        before, after = report(base), report(h)
        rejected = not after.holds
        changed = (after.isolated_vertex, after.isolated_edges) != (before.isolated_vertex, before.isolated_edges)
        assert rejected or changed or after.score != 0
        if not after.octahedral.holds:
            # The reported counterexample really is violated.
            assert not octahedron_parity(h, after.octahedral.counterexample).constant
    clock.check()
