import numpy as np
import pytest
from hypothesis import strategies as st

from macc.prob_core import Channel, Dist, JointUX


def random_pmf(rng, k, sparse=False):
    p = rng.dirichlet(np.ones(k))
    if sparse and k > 1:
        p[rng.random(k) < 0.3] = 0.0
        if p.sum() == 0:
            p[rng.integers(k)] = 1.0
        p = p / p.sum()
    return p


def random_channel(rng, k_in, k_out):
    return Channel(np.stack([random_pmf(rng, k_out) for _ in range(k_in)]))


def random_joint(rng, ku, kx, sparse=False):
    return JointUX(random_pmf(rng, ku * kx, sparse).reshape(ku, kx))


@st.composite
def pmfs(draw, size):
    w = draw(st.lists(st.floats(0.0, 1.0), min_size=size, max_size=size))
    w = np.asarray(w) + 1e-3
    return w / w.sum()


@st.composite
def channels(draw, k_in, k_out):
    return Channel(np.stack([draw(pmfs(k_out)) for _ in range(k_in)]))


@st.composite
def joints(draw, ku, kx):
    return JointUX(draw(pmfs(ku * kx)).reshape(ku, kx))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def bsc_joint_02():
    """Uniform content through BSC(0.2): gamma0 = beta1 = 0.4, gamma1 = beta0 = 0.1."""
    return JointUX([[0.4, 0.1], [0.1, 0.4]])


@pytest.fixture
def uniform_binary():
    return Dist.uniform(2)
