import pytest

_OUTCOMES = {}


@pytest.fixture
def criterion():
    """Record one acceptance outcome: ``criterion(number, passed, detail)``."""

    def record(number, passed, detail):
        if not isinstance(passed, str):
            passed = bool(passed)
        status = passed if isinstance(passed, str) else "PASS" if passed else "FAIL"
        _OUTCOMES[number] = f"criterion {number:>2}: {status}  {detail}"
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        terminalreporter.write_line(_OUTCOMES[number])
