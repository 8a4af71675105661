import pytest
from hypothesis import HealthCheck, settings

from bergman import acceptance

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def cassini_basis():
    """Cassini oval from a = -0.26, n_max = 100, 512 bits (shared with the acceptance suite)."""
    return acceptance.basis_for("cassini", 100)


@pytest.fixture(scope="session")
def joukowsky_basis():
    """Joukowsky level curve R = 2.5, n_max = 80, 512 bits."""
    return acceptance.basis_for("joukowsky", 80)


@pytest.fixture(scope="session")
def cassini():
    return acceptance.cassini()


@pytest.fixture(scope="session")
def joukowsky():
    return acceptance.joukowsky()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_lines():
    return ACCEPTANCE_LINES
