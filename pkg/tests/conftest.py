"""Shared fixtures and the per-criterion PASS/FAIL report."""
from __future__ import annotations

from collections import OrderedDict

import pytest

_RESULTS: "OrderedDict[str, list[tuple[str, str]]]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(cid): acceptance criterion this test checks")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        cid = str(marker.args[0])
        _RESULTS.setdefault(cid.rstrip("abcdefgh"), []).append((cid, "PASS" if rep.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_RESULTS, key=int):
        parts = _RESULTS[key]
        verdict = "PASS" if all(v == "PASS" for _, v in parts) else "FAIL"
        detail = ", ".join(f"{cid} {v}" for cid, v in parts) if len(parts) > 1 else ""
        terminalreporter.write_line(f"criterion {key:>2}: {verdict}" + (f"  ({detail})" if detail else ""))
