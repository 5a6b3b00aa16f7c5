"""Prints one pass/fail line per acceptance criterion after the run."""

ACCEPTANCE = "test_acceptance.py::"
_results: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if ACCEPTANCE not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        detail = dict(report.user_properties).get("detail", "")
        _results[report.nodeid] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (verdict, detail) in _results.items():
        name = nodeid.split("::")[-1]
        terminalreporter.write_line(f"{verdict}  {name}  {detail}".rstrip())
