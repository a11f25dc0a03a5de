import pytest

from lislsim.orbit import ConstellationConfig, PhysicalConstants, build_constellation

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def starlink():
    """Default shell (F=0, r_E=6371 km)."""
    return build_constellation(ConstellationConfig())


@pytest.fixture(scope="session")
def starlink15():
    """Best-matching phasing factor from the sweep."""
    return build_constellation(ConstellationConfig(phasing_factor=15))


@pytest.fixture(scope="session")
def r6378_constants():
    return PhysicalConstants(earth_radius_km=6378.0)


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
