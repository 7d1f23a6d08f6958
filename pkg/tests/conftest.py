import pytest

# Acceptance verdicts, filled by tests/test_acceptance.py and printed after the run.
VERDICTS = {}


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for the calling acceptance test."""

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        VERDICTS[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(VERDICTS):
        terminalreporter.write_line(VERDICTS[number])
