import numpy as np
import pytest

from relucid.data import generate_p2, split, SplitSpec
from relucid.model import xor_network
from relucid.trainer import TrainConfig, train

XOR_CORNERS = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])


@pytest.fixture
def xor():
    return xor_network()


@pytest.fixture(scope="session")
def p2_split():
    return split(generate_p2(2000, seed=3), SplitSpec(0.8, 0))


@pytest.fixture(scope="session")
def p2_model(p2_split):
    """A quickly trained 5+5 network on P2; good enough to give nontrivial regions."""
    train_set, _ = p2_split
    return train(train_set, TrainConfig(learning_rate=0.005, epochs=60, batch_size=64, seed=1))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
