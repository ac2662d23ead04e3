import pytest

_LINES = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion."""
    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title}"
        _LINES.append(line + (f" ({detail})" if detail else ""))
    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda l: int(l.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
