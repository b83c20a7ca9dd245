import pytest

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    """Record one human-readable verdict line per acceptance criterion."""

    def record(number: int, passed: bool, detail: str) -> None:
        line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
