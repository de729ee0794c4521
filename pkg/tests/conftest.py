import numpy as np
import pytest

from dcann import harness, mlp, synthgen


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def tiny_config():
    return harness.ExperimentConfig(
        generator=synthgen.GeneratorConfig(n_observations=400, n_features=8),
        p_true_grid=(0.5, 0.8),
        v_grid=(1, 3, 8),
        repetitions=2,
        master_seed=7,
        mlp=mlp.TrainSettings(max_epochs=20),
    )


@pytest.fixture(scope="session")
def tiny_sweep(tiny_config):
    return harness.run(tiny_config)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
