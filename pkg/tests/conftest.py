"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""
import pytest

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            num, title = m.args
            _CRITERIA.setdefault(num, {"title": title, "tests": {}})["tests"][item.nodeid] = None


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is None:
        return
    tests = _CRITERIA[m.args[0]]["tests"]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        tests[item.nodeid] = rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        info = _CRITERIA[num]
        results = list(info["tests"].values())
        if any(r is None for r in results):
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"AC{num} {status:7s} {info['title']}")
