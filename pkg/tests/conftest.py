import sys
from collections import Counter
from pathlib import Path

import pytest

CRITERIA = {
    1: "exact enumeration of maximal configurations",
    2: "3x3 preimage census",
    3: "exact occupancy laws",
    4: "3x4 preimage census (slow)",
    5: "most-built efficient, least-built inefficient",
    6: "density table reproduction",
    7: "5x6 occupancy support",
    8: "chi-square fit of the 3x3 law",
    9: "property suite",
    10: "performance and determinism",
}
_results: dict = {}

sys.path.insert(0, str(Path(__file__).parent))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run tests marked slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip = pytest.mark.skip(reason="slow; pass --runslow to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def census_cache():
    """Preimage censuses are expensive at 12 lots; compute each at most once per session."""
    from settlement.enumeration import count_preimages
    from settlement.grid import Dims

    cache = {}

    def get(m, n):
        if (m, n) not in cache:
            cache[(m, n)] = count_preimages(Dims(m, n))
        return cache[(m, n)]

    return get


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion k")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    tally = _results.setdefault(marker.args[0], Counter())
    if report.failed:
        tally["failed"] += 1
    elif report.skipped:
        tally["skipped"] += 1
    elif report.when == "call":
        tally["passed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for k, title in CRITERIA.items():
        tally = _results.get(k, Counter())
        if tally["failed"]:
            status = "FAIL"
        elif tally["passed"] and not tally["skipped"]:
            status = "PASS"
        elif tally["passed"]:
            status = "PARTIAL"
        elif tally["skipped"]:
            status = "SKIPPED"
        else:
            status = "NOT RUN"
        terminalreporter.write_line(
            f"criterion {k:>2} {status:<8} {title} "
            f"(passed {tally['passed']}, failed {tally['failed']}, skipped {tally['skipped']})"
        )
