import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

_acceptance_lines = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    name = marker.args[0] if marker.args else item.name
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    if report.when == "call" or (report.when == "setup" and not report.passed):
        if report.skipped:
            status = "SKIP"
            if isinstance(report.longrepr, tuple):
                detail = report.longrepr[2].removeprefix("Skipped: ")
        else:
            status = "PASS" if report.passed else "FAIL"
        _acceptance_lines.append(f"[{status}] {name}" + (f" ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in _acceptance_lines:
        terminalreporter.write_line(line)
