import pytest

from ldpc_bounds.ensembles import DegreeDistribution, check_fractions

TABLE_ENSEMBLES = [(3, 6), (4, 6), (3, 4)]

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = _criteria.setdefault(number, {"title": title, "passed": 0, "failed": []})
    if report.when == "call":
        if report.passed:
            entry["passed"] += 1
        elif report.failed:
            entry["failed"].append(item.name)
    elif report.failed:
        entry["failed"].append(f"{item.name} ({report.when})")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "FAIL" if entry["failed"] or not entry["passed"] else "PASS"
        line = f"criterion {number} [{entry['title']}]: {status}"
        if entry["failed"]:
            line += " (failed: " + ", ".join(entry["failed"]) + ")"
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def table_profiles():
    return {ens: check_fractions(DegreeDistribution.regular(*ens)) for ens in TABLE_ENSEMBLES}
