import numpy as np
import pytest

from gaptae import RewardFn, TabularMdp


@pytest.fixture
def chain3():
    """Deterministic chain 0 -> 1 -> 2 -> 2, every action identical."""
    P = np.zeros((3, 2, 3))
    P[0, :, 1] = P[1, :, 2] = P[2, :, 2] = 1.0
    return TabularMdp(P, horizon=2, initial_state=0)


@pytest.fixture
def one_state():
    def make(A=2, H=3, r=1.0):
        mdp = TabularMdp(np.ones((1, A, 1)), H, 0)
        return mdp, RewardFn(np.full((H, 1, A), r))

    return make
