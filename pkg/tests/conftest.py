"""Shared pytest wiring.

The acceptance tests double as the release checklist, so the terminal
summary prints one PASS/FAIL line per acceptance criterion.
"""


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    reports = []
    for key in ("passed", "failed"):
        reports.extend(terminalreporter.stats.get(key, []))
    acceptance = [
        r for r in reports
        if getattr(r, "when", None) == "call" and "test_acceptance.py" in r.nodeid
    ]
    if not acceptance:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for report in acceptance:
        name = report.nodeid.split("::")[-1]
        verdict = "PASS" if report.passed else "FAIL"
        terminalreporter.write_line(f"{verdict}: {name}")
