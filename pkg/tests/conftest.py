import acceptance_report


def pytest_terminal_summary(terminalreporter):
    if not acceptance_report.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(acceptance_report.LINES):
        terminalreporter.write_line(acceptance_report.LINES[k])
