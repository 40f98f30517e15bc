import pytest

CRITERIA = []


@pytest.fixture(scope="session")
def criterion():
    """Record one pass/fail line per acceptance criterion; lines are echoed in the summary."""

    def record(number, name, ok, detail):
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {name} ({detail})"
        CRITERIA.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)
