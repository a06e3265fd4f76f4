"""Collects acceptance outcomes and prints one line per criterion at the end of the run."""
from collections import OrderedDict

import pytest

_OUTCOMES: "OrderedDict[str, list]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(cid, title): acceptance criterion this test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        cid, title = mark.args
        entry = _OUTCOMES.setdefault(cid, [title, []])
        detail = ", ".join(f"{k}={v}" for k, v in item.user_properties)
        entry[1].append((item.name, report.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(_OUTCOMES, key=lambda c: int(c[1:])):
        title, parts = _OUTCOMES[cid]
        ok = all(passed for _, passed, _ in parts)
        tr.write_line(f"{'PASS' if ok else 'FAIL'} {cid}: {title}")
        for name, passed, detail in parts:
            tr.write_line(f"    {'pass' if passed else 'FAIL'} {name}  {detail}")
