import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from isodia import Lattice, named_lattice  # noqa: E402

REMARK_GRAM = [[4, -2, -1], [-2, 4, -1], [-1, -1, 3]]
D3_GRAM = [[2, 0, 1], [0, 2, 1], [1, 1, 2]]
HEXPRISM_GRAM = [[2, 1, 0], [1, 2, 0], [0, 0, 1]]


@pytest.fixture(scope="session")
def z3():
    return named_lattice("Z", 3)


@pytest.fixture(scope="session")
def remark():
    return Lattice.from_gram(REMARK_GRAM)


@pytest.fixture(scope="session")
def d3():
    return Lattice.from_gram(D3_GRAM)


@pytest.fixture(scope="session")
def a2():
    return Lattice.from_gram([[2, 1], [1, 2]])


@pytest.fixture(scope="session")
def hexprism():
    return Lattice.from_gram(HEXPRISM_GRAM)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
