import re

_CRIT = re.compile(r"test_criterion_(\d+)")
_results: dict[int, bool] = {}


def pytest_runtest_logreport(report):
    m = _CRIT.search(report.nodeid)
    if not m or (report.when != "call" and report.passed):
        return
    n = int(m.group(1))
    ok = report.passed or report.skipped
    _results[n] = _results.get(n, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if _results[n] else 'FAIL'}")
