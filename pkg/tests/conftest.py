"""Collects acceptance outcomes and prints one line per criterion."""

import pytest

_OUTCOMES: dict[int, list] = {}
_TITLES: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    n, title = mark.args
    _TITLES[n] = title
    _OUTCOMES.setdefault(n, []).append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_OUTCOMES):
        ok = all(_OUTCOMES[n])
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {_TITLES[n]}")
