import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def record():
    """Collect one status line per acceptance criterion for the terminal summary."""

    def _record(criterion: str, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
