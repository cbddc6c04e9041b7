"""Acceptance bookkeeping: tests marked ``criterion(n, title)`` are grouped
and one PASS/FAIL line per criterion is printed at the end of the run."""
from collections import OrderedDict

import pytest

_CRITERIA = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, {"title": title, "passed": [], "failed": []})
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        key = "passed" if rep.passed else ("failed" if rep.failed else None)
        if key:
            entry[key].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        if not entry["passed"] and not entry["failed"]:
            status = "SKIP"
        else:
            status = "FAIL" if entry["failed"] else "PASS"
        line = f"criterion {number:>2}: {status}  {entry['title']}"
        if entry["failed"]:
            line += f"  (failing: {', '.join(entry['failed'])})"
        tr.write_line(line)
