import numpy as np
import pytest

from conelab import polyhedral
from helpers import ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


PYRAMID_GENERATORS = [[1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]]
PYRAMID_NORMALS = [[1, -1, 0], [1, 1, 0], [1, 0, -1], [1, 0, 1]]


@pytest.fixture
def wedge():
    """2-D cone spanned by (1,0) and (1,1)."""
    return polyhedral([[1, 0], [1, 1]], [[0, 1], [1, -1]])


@pytest.fixture
def pyramid():
    """3-D cone over a square."""
    return polyhedral(PYRAMID_GENERATORS, PYRAMID_NORMALS)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
