import numpy as np
import pytest

from poisson_outage import DensityModel, LinkParams


@pytest.fixture
def fig4_link():
    return LinkParams.from_r_max(4.0, 1e3)


@pytest.fixture
def fig4_density():
    return DensityModel.uniform(100.0 / (np.pi * 1e6))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed after the run
CRITERIA: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[n])
