import pytest

from armalloc import OperatingTargets, TrialParams

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def default_params():
    return TrialParams(k=2)


@pytest.fixture
def default_targets():
    return OperatingTargets()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
