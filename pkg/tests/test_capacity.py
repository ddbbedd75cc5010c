import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from macc.capacity import (
    BinaryParams,
    ProblemSpec,
    SolverConfig,
    binary_achieving_joint,
    binary_capacity_closed_form,
    binary_crossover,
    capacity_sweep,
    feasibility,
    grid_search_binary,
    information_capacity,
    objective,
    objective_grad,
    project_simplex,
)
from macc.prob_core import Channel, JointUX, joint_uy_from, marginals, mutual_information
from macc.security import DistortionMatrix, max_security, sigma

from conftest import random_channel

HAM2 = DistortionMatrix.hamming(2)
FAST = SolverConfig(restarts=8)


def h2(p):
    mp.mp.dps = 40
    p = mp.mpf(p)
    if p in (0, 1):
        return 0.0
    return float(-p * mp.log(p, 2) - (1 - p) * mp.log(1 - p, 2))


def blahut_arimoto(w, iters=20000, tol=1e-13):
    """Classical channel capacity in bits of the channel matrix ``w``."""
    k = w.shape[0]
    p = np.full(k, 1.0 / k)
    for _ in range(iters):
        q = p @ w
        with np.errstate(divide="ignore", invalid="ignore"):
            dkl = np.where(w > 0, w * np.log2(w / q), 0.0).sum(axis=1)
        c = 2.0**dkl
        lower, upper = np.log2(p @ c), np.log2(c.max())
        p = p * c / (p @ c)
        if upper - lower < tol:
            break
    return float(lower)


# --- closed form -----------------------------------------------------------------


def test_crossover():
    assert binary_crossover(0.1, 0.1) == pytest.approx(0.18, abs=1e-15)
    assert binary_crossover(0.3, 0.5) == 0.5
    assert binary_crossover(0.0, 0.2) == pytest.approx(0.2, abs=1e-15)


def test_closed_form_examples():
    assert binary_capacity_closed_form(0.0, 0.0) == 1.0
    assert binary_capacity_closed_form(0.1, 0.1) == pytest.approx(0.319923, abs=1e-6)
    assert binary_capacity_closed_form(0.1, 0.1) == pytest.approx(1 - h2("0.18"), abs=1e-13)


@pytest.mark.parametrize("p1", [0.0, 0.05, 0.1, 0.2, 0.37, 0.5])
def test_closed_form_endpoints(p1):
    assert binary_capacity_closed_form(p1, 0.5) == 0.0
    assert binary_capacity_closed_form(p1, 0.0) == pytest.approx(1 - h2(p1), abs=1e-12)


def test_closed_form_infeasible():
    assert not BinaryParams(0.1, 0.51).feasible
    assert binary_capacity_closed_form(0.1, 0.6) == 0.0
    with pytest.raises(ValueError):
        BinaryParams(1.2, 0.1)


@given(st.floats(0, 0.5), st.floats(0, 0.5))
def test_achieving_joint_attains_closed_form(p1, alpha):
    j = binary_achieving_joint(alpha)
    assert sigma(j, HAM2) == pytest.approx(alpha, abs=1e-12)
    assert marginals(j)[1].probs[0] == pytest.approx(0.5)
    mi = mutual_information(joint_uy_from(j, Channel.bsc(p1)))
    assert mi == pytest.approx(binary_capacity_closed_form(p1, alpha), abs=1e-12)


# --- feasibility ----------------------------------------------------------------


def test_feasibility_examples():
    assert feasibility(HAM2, 0.4)
    assert not feasibility(HAM2, 0.51)
    assert feasibility(DistortionMatrix(np.zeros((2, 2))), 0.0)


def test_infeasible_branch():
    res = information_capacity(ProblemSpec(Channel.bsc(0.1), HAM2, 0.6), FAST)
    assert not res.feasible and res.value == 0.0 and res.argmax_joint is None
    d3 = DistortionMatrix([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    res = information_capacity(ProblemSpec(Channel.identity(3), d3, max_security(d3) + 0.01), FAST)
    assert not res.feasible and res.value == 0.0


def test_problem_spec_validation():
    with pytest.raises(ValueError):
        ProblemSpec(Channel.bsc(0.1), HAM2, -0.1)
    with pytest.raises(ValueError):
        ProblemSpec(Channel.bsc(0.1), DistortionMatrix.hamming(3), 0.1)


# --- generic solver ---------------------------------------------------------------


@pytest.mark.parametrize("p1", [0.05, 0.1, 0.2])
def test_unconstrained_matches_bsc_capacity(p1):
    res = information_capacity(ProblemSpec(Channel.bsc(p1), HAM2, 0.0), FAST)
    assert res.value == pytest.approx(1 - h2(p1), abs=1e-6)


def test_unconstrained_matches_blahut_arimoto(rng):
    for _ in range(4):
        ch = random_channel(rng, 3, int(rng.integers(2, 5)))
        res = information_capacity(ProblemSpec(ch, DistortionMatrix.hamming(3), 0.0), FAST)
        assert res.value == pytest.approx(blahut_arimoto(ch.rows), abs=1e-4)


def test_security_at_max_gives_zero():
    res = information_capacity(ProblemSpec(Channel.bsc(0.1), HAM2, 0.5), FAST)
    assert res.feasible and res.value == 0.0
    assert sigma(res.argmax_joint, HAM2) >= 0.5 - 1e-9


@pytest.mark.parametrize("p1,alpha", [(0.1, 0.1), (0.05, 0.3), (0.2, 0.2)])
def test_result_invariants_and_closed_form_lower_bound(p1, alpha):
    ch = Channel.bsc(p1)
    res = information_capacity(ProblemSpec(ch, HAM2, alpha), FAST)
    j = res.argmax_joint
    assert res.feasible and res.converged
    assert sigma(j, HAM2) >= alpha - 1e-9
    assert res.value == pytest.approx(mutual_information(joint_uy_from(j, ch)), abs=1e-9)
    # the symmetric joint is feasible, so the maximum is at least its value
    assert res.value >= binary_capacity_closed_form(p1, alpha) - 1e-9
    # constraint is active in the interior
    assert sigma(j, HAM2) == pytest.approx(alpha, abs=1e-4)
    assert res.diagnostics.constraint_active


@pytest.mark.parametrize("p1,alpha", [(0.1, 0.1), (0.2, 0.35), (0.05, 0.05)])
def test_generic_against_grid_oracle(p1, alpha):
    ch = Channel.bsc(p1)
    grid, gj = grid_search_binary(ch, HAM2, alpha, step=0.01)
    assert sigma(JointUX(gj), HAM2) >= alpha - 1e-9
    res = information_capacity(ProblemSpec(ch, HAM2, alpha), FAST)
    # the solver searches a superset of the grid and the grid is 0.01-dense
    assert res.value >= grid - 1e-9
    assert res.value <= grid + 0.02


def test_hand_checked_asymmetric_joint_beats_symmetric():
    # a Z-shaped joint with sigma = 0.1 and I(U;Y) above the symmetric one
    j = JointUX([[0.0, 0.42], [0.48, 0.10]])
    ch = Channel.bsc(0.1)
    assert sigma(j, HAM2) == pytest.approx(0.1, abs=1e-12)
    assert mutual_information(joint_uy_from(j, ch)) > binary_capacity_closed_form(0.1, 0.1) + 0.02


def test_ternary_constrained_feasible(rng):
    ch = random_channel(rng, 3, 3)
    d = DistortionMatrix([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    alpha = 0.5 * max_security(d)
    res = information_capacity(ProblemSpec(ch, d, alpha), SolverConfig(restarts=4))
    assert sigma(res.argmax_joint, d) >= alpha - 1e-9
    assert 0 <= res.value <= blahut_arimoto(ch.rows) + 1e-6


def test_larger_hash_alphabet_not_worse():
    ch = Channel.bsc(0.1)
    base = information_capacity(ProblemSpec(ch, HAM2, 0.2), FAST)
    wide = information_capacity(ProblemSpec(ch, HAM2, 0.2), SolverConfig(u_size=3, restarts=8))
    assert wide.argmax_joint.table.shape == (3, 2)
    assert wide.value >= base.value - 1e-4


def test_determinism_and_thread_independence():
    spec = ProblemSpec(Channel.bsc(0.2), HAM2, 0.15)
    a = information_capacity(spec, SolverConfig(restarts=6, seed=3))
    b = information_capacity(spec, SolverConfig(restarts=6, seed=3, threads=3))
    assert a.value == b.value
    assert np.array_equal(a.argmax_joint.table, b.argmax_joint.table)
    assert a.diagnostics.restart_values == b.diagnostics.restart_values


# --- sweeps ---------------------------------------------------------------------


def test_sweep_examples():
    rows = capacity_sweep(Channel.bsc(0.1), HAM2, [0, 0.25, 0.5])
    assert [r.alpha for r in rows] == [0, 0.25, 0.5]
    # endpoints evaluated at crossovers 0.1, 0.1 + 0.25 * 0.8 = 0.3 and 0.5
    expect = [1 - h2("0.1"), 1 - h2("0.3"), 0.0]
    assert np.allclose([r.capacity for r in rows], expect, atol=1e-4)
    assert rows[0].capacity == pytest.approx(0.5310, abs=1e-4)
    assert capacity_sweep(Channel.bsc(0.1), HAM2, []) == []
    rows = capacity_sweep(Channel.bsc(0.0), HAM2, [0, 0.5])
    assert [r.capacity for r in rows] == [1.0, 0.0]


def test_sweep_rejects_unsorted_and_bad_mode():
    with pytest.raises(ValueError):
        capacity_sweep(Channel.bsc(0.1), HAM2, [0.2, 0.1])
    with pytest.raises(ValueError):
        capacity_sweep(Channel.bsc(0.1), HAM2, [0.1], mode="magic")
    with pytest.raises(ValueError):
        capacity_sweep(Channel([[0.9, 0.1], [0.2, 0.8]]), HAM2, [0.1])


@pytest.mark.parametrize("p1", [0.05, 0.1, 0.2])
def test_sweep_monotone(p1):
    alphas = np.linspace(0, 0.6, 25)
    vals = [r.capacity for r in capacity_sweep(Channel.bsc(p1), HAM2, alphas)]
    assert all(b <= a + 1e-6 for a, b in zip(vals, vals[1:]))


def test_generic_sweep_monotone():
    alphas = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.55]
    vals = [r.capacity for r in capacity_sweep(Channel.bsc(0.1), HAM2, alphas, "generic", FAST)]
    assert all(b <= a + 1e-6 for a, b in zip(vals, vals[1:]))
    assert vals[-1] == 0.0


# --- numerical pieces ---------------------------------------------------------------


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=9))
def test_project_simplex(v):
    v = np.asarray(v)
    p = project_simplex(v)
    assert np.all(p >= 0) and p.sum() == pytest.approx(1.0)
    # Euclidean projection: no other simplex point on a random draw is closer
    rng = np.random.default_rng(len(v))
    for _ in range(20):
        q = rng.dirichlet(np.ones(len(v)))
        assert np.linalg.norm(v - p) <= np.linalg.norm(v - q) + 1e-9


def test_objective_gradient_finite_difference(rng):
    w = random_channel(rng, 2, 3).rows
    shape = (3, 2)
    x = rng.dirichlet(np.ones(6)) * 0.9 + 0.1 / 6
    g = objective_grad(x, w, shape)
    h = 1e-6
    for i in range(6):
        e = np.zeros(6)
        e[i] = h
        fd = (objective(x + e, w, shape) - objective(x - e, w, shape)) / (2 * h)
        # gradient is taken for the unnormalized joint
        assert g[i] == pytest.approx(fd, abs=1e-5)
