import pytest

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance():
    """Records one PASS/FAIL line per acceptance criterion."""

    def record(number, title, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number:>2} {title}: {detail}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
