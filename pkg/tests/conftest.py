import numpy as np
import pytest

from quchater.config import Config, apply_overrides


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def prepared():
    """Default preprocessing of the bundled data, shared across tests."""
    from quchater.preprocess.pipeline import prepare_from_config

    data, test_ds = prepare_from_config(Config())
    return data


@pytest.fixture
def tiny_cfg():
    """Small, fast configuration for end-to-end plumbing tests."""
    return apply_overrides(Config(), [
        "train.epochs=2", "model.hidden_size=4", "model.qubits=2", "model.tcn_channels=3",
        "model.reservoir_size=8", "model.cnn_channels=[3,4]", "bayesopt.budget=6",
        "bayesopt.objective_epochs=1", "sweep.qubits=[2,3]",
    ])


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance PASS/FAIL lines after the run, outside output capture."""
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
