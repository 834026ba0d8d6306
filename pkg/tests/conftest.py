import pytest

from sta_crane import CraneParams, TransportTask

ACCEPTANCE_LINES = []


def record(criterion, passed, detail):
    """Log an acceptance criterion outcome for the end-of-session summary."""
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def crane_params():
    return CraneParams(m=10.0, M=0.0, l=5.0, gamma=0.0, g=9.8)


@pytest.fixture
def crane_task():
    return TransportTask(d=10.0, t_f=7.0)


@pytest.fixture
def swing_params():
    return CraneParams(m=10.0, l=5.0)


@pytest.fixture
def swing_task():
    return TransportTask(d=10.0, t_f=10.0)
