from acceptance_log import RESULTS


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, status, detail in RESULTS:
        terminalreporter.write_line(f"{status} criterion {criterion}: {detail}")
