import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaptae import (
    DeterministicPolicy,
    MixturePolicy,
    RewardFn,
    TabularMdp,
    brute_force_optimal,
    clip,
    gaps,
    greedy_policy,
    mixture_value,
    optimal_values,
    policy_value,
)
from gaptae.dp import reachable
from gaptae.envs import bandit_as_mdp, random_mdp
from gaptae.errors import EmptyMixture, TooLarge


def test_constant_reward_single_state(one_state):
    mdp, reward = one_state(A=1, H=3)
    vt = optimal_values(mdp, reward)
    assert vt.V[0, 0] == 3.0
    assert np.all(vt.V[3] == 0)


def test_zero_reward_gives_zero_values():
    env = random_mdp(4, 3, 5, seed=0)
    vt = optimal_values(env.mdp, RewardFn.zeros(4, 3, 5))
    assert not vt.Q.any() and not vt.V.any()


def test_optimal_matches_enumeration_small():
    env = random_mdp(3, 2, 3, seed=1)
    assert optimal_values(*env).initial_value(env.mdp.initial_state) == pytest.approx(
        brute_force_optimal(*env), abs=1e-10
    )


def test_hand_built_two_by_two():
    # x0: a0 stays, a1 jumps to x1; x1: a0 is a coin flip, a1 stays.
    P = np.zeros((2, 2, 2))
    P[0, 0, 0] = P[0, 1, 1] = P[1, 1, 1] = 1.0
    P[1, 0] = [0.5, 0.5]
    r = np.array([[[0.2, 0.0], [0.7, 0.1]], [[0.1, 0.3], [0.9, 0.4]]])
    mdp, reward = TabularMdp(P, 2, 0), RewardFn(r)
    # last step: V(x0)=0.3, V(x1)=0.9; first step at x0: max(0.2+0.3, 0.0+0.9) = 0.9
    assert brute_force_optimal(mdp, reward) == pytest.approx(0.9, abs=1e-12)
    assert optimal_values(mdp, reward).V[0, 0] == pytest.approx(0.9, abs=1e-12)


def test_brute_force_guard():
    env = random_mdp(5, 4, 3, seed=0)
    with pytest.raises(TooLarge):
        brute_force_optimal(*env)


def test_brute_force_single_state(one_state):
    mdp, reward = one_state(A=2, H=4, r=0.25)
    assert brute_force_optimal(mdp, reward) == pytest.approx(1.0)


def test_greedy_policy_attains_optimum():
    env = random_mdp(6, 3, 5, seed=4)
    vt = optimal_values(*env)
    pv = policy_value(*env, greedy_policy(vt))
    np.testing.assert_allclose(pv.V, vt.V, atol=1e-12, rtol=0)


def test_any_policy_on_unit_reward_gets_horizon(one_state):
    mdp, reward = one_state(A=3, H=4)
    pi = DeterministicPolicy(np.array([[2], [0], [1], [1]]))
    assert policy_value(mdp, reward, pi).V[0, 0] == 4.0


def _monte_carlo_value(mdp, reward, pi, n, seed):
    """Vectorised simulation, independent of the library's sampler."""
    rng = np.random.default_rng(seed)
    S, A, H = mdp.dims
    x = np.full(n, mdp.initial_state)
    total = np.zeros(n)
    cdf = np.cumsum(mdp.transition, axis=2)
    for h in range(H):
        a = pi.action[h, x]
        total += reward.r[h, x, a]
        u = rng.random(n)[:, None]
        x = np.minimum((u >= cdf[x, a]).sum(axis=1), S - 1)
    return total.mean()


def test_policy_value_matches_monte_carlo():
    env = random_mdp(4, 2, 4, seed=8)
    pi = DeterministicPolicy(np.random.default_rng(1).integers(2, size=(4, 4)))
    n = 100_000
    exact = policy_value(*env, pi).initial_value(env.mdp.initial_state)
    est = _monte_carlo_value(env.mdp, env.reward, pi, n, seed=3)
    assert abs(est - exact) <= 6 * env.mdp.horizon / (2 * math.sqrt(n))


def test_mixture_values():
    env = random_mdp(3, 2, 3, seed=2)
    pi = DeterministicPolicy(np.zeros((3, 3), int))
    v = policy_value(*env, pi).initial_value(env.mdp.initial_state)
    assert mixture_value(*env, MixturePolicy.of([pi])) == pytest.approx(v, abs=1e-12)
    assert mixture_value(*env, MixturePolicy.of([pi, pi])) == pytest.approx(v, abs=1e-12)
    mdp, reward = bandit_as_mdp([1.0, 0.0])
    mix = MixturePolicy.of([DeterministicPolicy([[0]]), DeterministicPolicy([[1]])])
    assert mixture_value(mdp, reward, mix) == pytest.approx(0.5)
    with pytest.raises(EmptyMixture):
        MixturePolicy(np.zeros((0, 1, 1), int))


def test_bandit_gap():
    rep = gaps(*bandit_as_mdp([0.9, 0.5, 0.5]), rho_claim=0.3)
    assert rep.gap_min == pytest.approx(0.4)
    assert rep.rho_ok is True
    assert gaps(*bandit_as_mdp([0.9, 0.5]), rho_claim=0.5).rho_ok is False


def test_all_equal_actions_have_infinite_gap(one_state):
    rep = gaps(*one_state(A=3, H=3), rho_claim=10.0)
    assert rep.gap_min == math.inf
    assert rep.rho_ok is True  # vacuous


def test_gap_table_properties():
    env = random_mdp(5, 3, 4, seed=11)
    rep = gaps(*env)
    assert np.all(rep.gap >= 0)
    assert np.all((rep.gap == 0).any(axis=2))
    full = gaps(*env, reachable_only=False)
    assert full.gap_min <= rep.gap_min


def test_reachability():
    P = np.zeros((3, 1, 3))
    P[0, 0, 1] = P[1, 0, 1] = P[2, 0, 2] = 1.0
    reach = reachable(TabularMdp(P, 3, 0))
    assert reach.tolist() == [[True, False, False], [False, True, False], [False, True, False]]


def test_clip_examples():
    assert clip(0.4, 0.5) == 0
    assert clip(0.5, 0.5) == 0.5
    assert clip(-1.0, 0.1) == 0
    np.testing.assert_array_equal(clip(np.array([0.1, 0.3]), 0.2), [0.0, 0.3])


pos = st.floats(1e-3, 1e3, allow_nan=False)
real = st.floats(-1e3, 1e3, allow_nan=False)


@given(a=pos, z=real, rho=pos)
def test_clip_scaling(a, z, rho):
    assert a * clip(z, rho) == pytest.approx(clip(a * z, a * rho), rel=1e-12, abs=1e-12)


nonneg = st.floats(0, 1e3, allow_nan=False)


@given(rho=pos, drho=nonneg, A=nonneg, dA=nonneg)
def test_clip_monotone(rho, drho, A, dA):
    # clipped quantities are nonnegative bonuses; for negative A' the upper bound fails trivially
    rho_hi, A_hi = rho + drho, A + dA
    assert A - rho_hi <= clip(A, rho_hi) <= clip(A_hi, rho) <= A_hi


@given(A=nonneg, B=nonneg, rho=pos)
def test_clip_sum_with_nonnegative(A, B, rho):
    assert clip(A + B, rho) <= clip(A, rho / 2) + 2 * B + 1e-9


@given(parts=st.lists(st.floats(0, 1e3), min_size=1, max_size=5), rho=pos)
def test_clip_of_sum(parts, rho):
    m = len(parts)
    assert clip(sum(parts), rho) <= 2 * sum(clip(p, rho / (2 * m)) for p in parts) + 1e-9


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), S=st.integers(1, 3), A=st.integers(1, 2), H=st.integers(1, 3))
def test_optimal_dominates_random_policies(seed, S, A, H):
    env = random_mdp(S, A, H, seed)
    best = optimal_values(*env).initial_value(env.mdp.initial_state)
    rng = np.random.default_rng(seed)
    for _ in range(10):
        pi = DeterministicPolicy(rng.integers(A, size=(H, S)))
        assert policy_value(*env, pi).initial_value(env.mdp.initial_state) <= best + 1e-12
    assert best == pytest.approx(brute_force_optimal(*env), abs=1e-10)
