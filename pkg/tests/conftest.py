import re

_CRITERION = re.compile(r"test_criterion_(\d+)")
_results = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    num = int(m.group(1))
    ok = _results.get(num, True)
    if report.when == "call" or report.failed:
        _results[num] = ok and report.passed
    if report.skipped:
        _results[num] = False


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        terminalreporter.write_line(f"criterion {num}: {'PASS' if _results[num] else 'FAIL'}")
