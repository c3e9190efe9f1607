import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

_criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        # parametrized parts of one criterion: any failure fails it, durations add up
        _, ok, duration = _criteria.get(number, (title, True, 0.0))
        _criteria[number] = (title, ok and report.passed, duration + report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, ok, duration = _criteria[number]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{status}] AC{number:02d} {title} ({duration:.1f}s)")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
