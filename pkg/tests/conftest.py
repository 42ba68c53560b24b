import pytest

from stt_wall.units import cobalt

ACCEPTANCE: list[str] = []


@pytest.fixture
def co():
    return cobalt(alpha=0.02)


@pytest.fixture
def report():
    """Record a one-line acceptance verdict; echoed in the terminal summary."""

    def add(label: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} {label}: {detail}"
        ACCEPTANCE.append(line)
        print(line)
        return ok

    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
