import numpy as np
import pytest

from wfr_split_lab.flows import WfrContext
from wfr_split_lab.linalg import gaussian


@pytest.fixture(scope="session")
def fig1_left():
    """Diffuse target: variance 100 vs initial variance 1."""
    target = gaussian([20.0], [[100.0]])
    init = gaussian([0.0], [[1.0]])
    return WfrContext.from_target(target), init


@pytest.fixture(scope="session")
def fig1_right():
    """Concentrated target: variance 1 vs initial variance 100."""
    target = gaussian([20.0], [[1.0]])
    init = gaussian([0.0], [[100.0]])
    return WfrContext.from_target(target), init


@pytest.fixture(scope="session")
def instance_10d():
    """Deterministic 10D instance: diagonal target, identity covariance gap."""
    c_pi = np.diag(np.arange(1.0, 11.0))
    target = gaussian(np.ones(10), c_pi)
    init = gaussian(np.zeros(10), c_pi + np.eye(10))
    return WfrContext.from_target(target), init


def state_gap(a, b) -> float:
    return max(
        float(np.max(np.abs(a.mean - b.mean))),
        float(np.max(np.abs(a.cov.entries - b.cov.entries))),
    )
