import json

import pytest

from octasys.core import EdgeSet, Shape, encode_edge, format_edge, parse_edge
from octasys.oracle import extensions
from octasys.search import (
    BUDGET_EXCEEDED,
    EXHAUSTED,
    WITNESS,
    BoundReport,
    Budget,
    CaseParams,
    Checkpoint,
    CheckpointError,
    Engine,
    SearchNode,
    SearchOptions,
    branch_free,
    branch_isolated,
    branch_table_fix,
    case_lower_bound,
    generate_cases,
    normalize_initial,
    odd_row_designations,
    prove_bound,
    prune,
    run_case,
    verify_witness,
)
from octasys.tables import build_small_table, small_table_of
from octasys.verifier import isolated_edges

CASE_342 = CaseParams(3, 4, 2, 13)


def edge_codes(*texts):
    return {encode_edge(parse_edge(t)) for t in texts}


def test_case_lower_bound_examples():
    assert case_lower_bound(4, 3, 3, 2) == 13
    assert case_lower_bound(4, 3, 4, 2) == 13
    assert case_lower_bound(4, 2, 3, 2) == 13


def test_generate_cases():
    assert [c.triple for c in generate_cases(4, 13)] == [(3, 4, 2), (3, 4, 1), (3, 3, 2), (2, 3, 2)]
    assert generate_cases(4, 9) == []
    assert generate_cases(2, 4) == []
    assert {(1, 2, 1), (2, 2, 1)} <= {c.triple for c in generate_cases(2, 5)}
    for d in (2, 3, 4):
        for target in range(d + 1, d * d + 4):
            for c in generate_cases(d, target):
                c.validate(d)
                assert case_lower_bound(d, *c.triple) <= target


def test_case_validation():
    with pytest.raises(ValueError):
        CaseParams(4, 4, 2, 13).validate(4)
    with pytest.raises(ValueError):
        CaseParams(3, 1, 2, 13).validate(4)
    with pytest.raises(ValueError):
        CaseParams(0, 4, 2, 13).validate(4)
    CaseParams(4, 4, 2, 17).validate(4)


def test_designations_reduce_to_one():
    for d in (2, 3, 4):
        for b in range(1, d + 1):
            assert odd_row_designations(d, b) == [tuple(range(1, b + 1))]


def test_normalize_initial():
    node = normalize_initial(4, CASE_342)
    assert small_table_of(node.large_table).rows == ((1, 1, 1, 0, 0),) * 4
    assert node.partial.codes() == sorted(edge_codes("00000", "10000", "20000"))
    assert node.forbidden == edge_codes("30000", "40000")
    assert node.phase == "table-repair"
    one = normalize_initial(4, CaseParams(1, 4, 1, 17))
    assert small_table_of(one.large_table).rows == ((1, 0, 0, 0, 0),) * 4
    assert len(one.forbidden) == 4


def test_branch_table_fix_full_and_symmetric():
    node = normalize_initial(4, CASE_342)
    kids = branch_table_fix(node, (1, 3))
    added = [format_edge(sorted(set(k.partial) - set(node.partial))[0]) for k in kids]
    assert len(kids) == 15
    assert all(a[0] == "3" and set(a[1:]) <= {"0", "1"} and a != "30000" for a in added)
    sym = branch_table_fix(node, (1, 3), symmetric=True)
    added = [format_edge(sorted(set(k.partial) - set(node.partial))[0]) for k in sym]
    assert added == ["31000", "31100", "31110", "31111"]


def test_table_fix_flips_only_target_entry():
    node = normalize_initial(4, CASE_342)
    before = build_small_table(node.partial).rows
    child = branch_table_fix(node, (1, 3))[0]
    after = build_small_table(child.partial).rows
    diff = [(r + 1, c) for r in range(4) for c in range(5) if before[r][c] != after[r][c]]
    assert diff == [(1, 3)]


def test_sibling_exclusion():
    node = normalize_initial(4, CASE_342)
    kids = branch_table_fix(node, (1, 3))
    for i, k in enumerate(kids):
        earlier = {encode_edge(e) for kk in kids[:i] for e in set(kk.partial) - set(node.partial)}
        assert earlier <= k.forbidden


def test_prune_examples():
    case = CaseParams(3, 4, 2, 13)
    # 11 edges avoiding labels 2, 3, 4 of colour 4: three uncovered points
    edges = ["00000", "10000", "20000", "31000", "31100", "41000", "32100", "43210", "14321", "24130", "01230"]
    node = SearchNode.of(4, case, [parse_edge(e) for e in edges])
    assert prune(node) == "uncovered"
    covering = ["00000", "11111", "22222", "33333", "44444"]
    node = SearchNode.of(4, CaseParams(3, 4, 1, 13), [parse_edge(e) for e in covering])
    assert prune(node) is None
    doubled = covering + ["01234", "12340", "23401", "34012", "40123"]
    node = SearchNode.of(4, CaseParams(3, 4, 1, 13), [parse_edge(e) for e in doubled])
    assert prune(node) == "subcase"


def test_branch_isolated():
    case = CaseParams(3, 4, 2, 13)
    node = SearchNode.of(4, case, [parse_edge("00000"), parse_edge("31000")])
    kids = branch_isolated(node)
    assert 0 < len(kids) <= 20
    for k in kids:
        assert parse_edge("00000") not in isolated_edges(k.partial)
    with pytest.raises(ValueError):
        branch_isolated(normalize_initial(4, case))


def test_branch_free():
    shape = Shape(2)
    full = list(shape.edges())
    node = SearchNode.of(2, CaseParams(2, 2, 2, 27), full[:26])
    kids = branch_free(node)
    assert len(kids) <= 1 and all(len(k.partial) == 27 for k in kids)
    node = SearchNode.of(2, CaseParams(2, 2, 2, 27), full[:3])
    kids = branch_free(node)
    assert all(len(k.partial) == 4 for k in kids)
    assert [k.partial for k in kids] == [k.partial for k in branch_free(node)]


@pytest.mark.parametrize("target", range(1, 8))
def test_symmetry_does_not_change_verdicts(target, system_check):
    full = prove_bound(2, target, options=SearchOptions(symmetry=False))
    sym = prove_bound(2, target)
    free = prove_bound(2, target, options=SearchOptions(targeted=False))
    assert [c.outcome for c in full.certificates] == [c.outcome for c in sym.certificates]
    assert [c.outcome for c in free.certificates] == [c.outcome for c in sym.certificates]
    for rep in (full, sym, free):
        for w in rep.witnesses:
            system_check(w)


def test_d3_bound_nine(system_check):
    rep = prove_bound(3, 8)
    assert rep.proven and rep.summary() == "nu(3) >= 9"


def _pruned_nodes(d, case, limit):
    eng = Engine(d, case)
    cut = []
    original = eng.prune_reason

    def recording():
        reason = original()
        if reason is not None and len(cut) < limit:
            cut.append((list(eng.edges), eng.forbidden(), reason))
        return reason

    eng.prune_reason = recording
    eng.run()
    return eng, cut


@pytest.mark.parametrize("triple,target", [((1, 2, 2), 6), ((2, 2, 2), 6), ((1, 1, 2), 6), ((2, 1, 2), 7)])
def test_pruning_never_cuts_a_feasible_subtree(triple, target):
    case = CaseParams(*triple, target)
    eng, cut = _pruned_nodes(2, case, 60)
    assert cut
    for edges, forbidden, _ in cut:
        for h in extensions(Shape(2), edges, forbidden, target):
            assert verify_witness(h, case, eng.odd_rows), f"pruned node extends to {h}"


def test_witness_is_independently_verified(system_check):
    cert = run_case(2, CaseParams(1, 2, 1, 5))
    assert cert.outcome == WITNESS and len(cert.witness) == 5
    assert verify_witness(cert.witness, cert.case, cert.odd_rows) == []
    system_check(cert.witness)


def test_checkpoint_resume_matches_uninterrupted():
    case = CaseParams(2, 3, 2, 9)
    whole = run_case(3, case)
    assert whole.outcome == EXHAUSTED
    part = run_case(3, case, Budget(10_000))
    assert part.outcome == BUDGET_EXCEEDED
    data = json.loads(json.dumps(part.checkpoint.to_json()))
    cp = Checkpoint.from_json(data)
    mid = run_case(3, case, Budget(30_000), resume=cp)
    rest = run_case(3, case, resume=mid.checkpoint)
    assert rest.outcome == EXHAUSTED
    assert rest.statistics.deterministic() == whole.statistics.deterministic()


def test_parallel_matches_sequential():
    case = CaseParams(2, 3, 2, 9)
    for limit in (None, 5_000, 20_000):
        seq = run_case(3, case, Budget(limit))
        par = run_case(3, case, Budget(limit), jobs=2)
        assert par.outcome == seq.outcome
        assert par.statistics.deterministic() == seq.statistics.deterministic()
        if seq.checkpoint:
            assert par.checkpoint.trail == seq.checkpoint.trail


def test_corrupt_checkpoints_rejected():
    cert = run_case(4, CASE_342, Budget(100))
    good = cert.checkpoint.to_json()
    bad_format = dict(good, format="nope")
    bad_trail = dict(good, trail=[999])
    missing = {k: v for k, v in good.items() if k != "trail"}
    for data in (bad_format, missing, "junk"):
        with pytest.raises(CheckpointError):
            Checkpoint.from_json(data)
    with pytest.raises(CheckpointError):
        run_case(4, CASE_342, resume=Checkpoint.from_json(bad_trail))
    with pytest.raises(CheckpointError):
        run_case(4, CaseParams(3, 4, 1, 13), resume=Checkpoint.from_json(good))


def test_report_round_trip_and_resume():
    rep = prove_bound(4, 13, Budget(300))
    assert not rep.proven and len(rep.pending) == 4
    again = BoundReport.from_json(json.loads(json.dumps(rep.to_json())))
    resumed = prove_bound(4, 13, Budget(900), resume=again)
    direct = prove_bound(4, 13, Budget(900))
    assert [c.statistics.deterministic() for c in resumed.certificates] == \
        [c.statistics.deterministic() for c in direct.certificates]


def test_witness_certificate_round_trip():
    rep = prove_bound(2, 5)
    again = BoundReport.from_json(rep.to_json())
    assert again.witnesses == rep.witnesses


def test_engine_state_consistent_after_run():
    eng = Engine(3, CaseParams(2, 3, 2, 8))
    start_edges = list(eng.edges)
    start_forb = eng.forbidden()
    assert eng.run()[0] == EXHAUSTED
    assert eng.edges == start_edges and eng.forbidden() == start_forb
    h = EdgeSet.from_codes(Shape(3), eng.edges)
    assert [t.score for t in eng.tables] == [t.score for t in SearchNode.of(3, eng.case, list(h)).tables]
