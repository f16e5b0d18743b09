import numpy as np
import pytest

from liftpir.gf import FieldSpec
from liftpir.storage import StorageConfig

# (u, v) points giving the storage table of the 4-server, F_3 fixture:
# W1 | W2 | W1 + W2 | W1 + 2 W2
F3_POINTS = ((1, 0), (0, 1), (1, 1), (1, 2))

ACCEPTANCE_LINES: list = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def f3_config():
    return StorageConfig(4, 2, 2, 1, 2, field=FieldSpec(3), eval_points=F3_POINTS)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
