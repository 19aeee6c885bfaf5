import pytest
from hypothesis import settings

from bicshg.dispersion import StructureParams
from bicshg.siegert import find_bound_state

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def p01():
    """R = 0.1, eps_c = 2, chi_c = 1e-3, kx = 0."""
    return StructureParams(0.1, 2.0, 1e-3, 0.0)


@pytest.fixture(scope="session")
def bs01(p01):
    return find_bound_state(1, 1, p01)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
