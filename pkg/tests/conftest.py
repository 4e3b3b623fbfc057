import numpy as np
import pytest

from liouville.generators import dipole_stream, gen_divfree, octupole_stream, radial_stream
from liouville.grid import make_grid

# frozen Gaussian moments (symbolic integration of the anchor stream functions)
PI = np.pi
M_RADIAL = PI / 2
M_DIPOLE = (PI / 8, 3 * PI / 8)
M_OCTUPOLE = 15 * PI / 128

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def grid():
    return make_grid(2, 256, 16.0)


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(2, 64, 16.0)


@pytest.fixture(scope="session")
def radial(grid):
    return gen_divfree(radial_stream(), grid)


@pytest.fixture(scope="session")
def dipole(grid):
    return gen_divfree(dipole_stream(), grid)


@pytest.fixture(scope="session")
def octupole(grid):
    return gen_divfree(octupole_stream(), grid)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
