"""Shared pytest configuration: acceptance-criterion summary lines."""

CRITERION_PREFIX = "test_criterion_"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            if getattr(report, "when", "call") != "call":
                continue
            nodeid = report.nodeid
            if "test_acceptance.py" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            if not name.startswith(CRITERION_PREFIX):
                continue
            label = name[len(CRITERION_PREFIX):]
            status = "PASS" if outcome == "passed" else "FAIL"
            lines.append((label, status))
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for label, status in lines:
            terminalreporter.write_line(f"[{status}] {label}")
