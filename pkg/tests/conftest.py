import pytest

from octasys.tables import colour_tables
from octasys.verifier import has_isolated_vertex, is_octahedral_system, isolated_edges

# Every octahedral system seen by a test is recorded here and rechecked below.
SEEN_SYSTEMS = []


def check_system(h):
    """Assert the invariants every octahedral system must satisfy, and record it."""
    assert is_octahedral_system(h)
    assert all(t.score == 0 for t in colour_tables(h))
    d = h.shape.d
    if has_isolated_vertex(h) is None and len(h) <= d * d:
        assert isolated_edges(h) == [], f"isolated edge in a small system {h}"
    SEEN_SYSTEMS.append(h.copy())
    return h


@pytest.fixture
def system_check():
    return check_system


# Acceptance results, printed one line per criterion at the end of the run.
ACCEPTANCE = {}


def pytest_collection_modifyitems(items):
    # The acceptance suite reads SEEN_SYSTEMS, so it must run after everything else.
    items.sort(key=lambda item: item.module.__name__.endswith("test_acceptance"))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        verdict = "PASS" if report.passed else "FAIL"
        ACCEPTANCE[props["criterion"]] = f"{verdict} {props['criterion']:>2}  {props.get('label', '')}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
