import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaptae import (
    BonusMode,
    ExplorationConfig,
    History,
    VisitCounts,
    explore,
    optimal_values,
    plan,
    planning_bonus,
    policy_value,
)
from gaptae.envs import random_gridworld, random_mdp
from gaptae.explorer import log_factor
from gaptae.planner import geometric_checkpoints, iter_plans, plan_at


def _counts(n, S=1, A=1):
    c = VisitCounts.empty(S, A)
    c.n_sa[:] = n
    return c


def test_planning_bonus_sentinel():
    assert np.all(planning_bonus(VisitCounts.empty(2, 3), 5.0, 4) == 4.0)


def test_planning_bonus_hand_value():
    assert planning_bonus(_counts(2), 1.0, 2)[0, 0] == pytest.approx(1.0, abs=1e-15)


def test_planning_bonus_simplified_hand_value():
    # H / sqrt(N) = 3 / 2
    assert planning_bonus(_counts(4), 7.0, 3, BonusMode.SIMPLIFIED)[0, 0] == pytest.approx(1.5, abs=1e-15)


@given(n=st.integers(1, 10**9), iota=st.floats(1e-3, 100), H=st.integers(1, 50))
def test_planning_bonus_below_exploration_sqrt_term(n, iota, H):
    assert planning_bonus(_counts(n), iota, H)[0, 0] <= math.sqrt(8 * H**2 * iota / n)


def test_geometric_checkpoints():
    assert geometric_checkpoints(1) == [1]
    assert geometric_checkpoints(10) == [1, 2, 4, 8, 10]
    assert geometric_checkpoints(16) == [1, 2, 4, 8, 16]


def _explored(S=3, A=2, H=3, K=40, seed=0, mode=BonusMode.FULL):
    mdp, reward = random_mdp(S, A, H, seed=seed)
    history, log = explore(mdp, ExplorationConfig(rho=0.1, episodes=K, bonus_mode=mode, seed=seed))
    return mdp, reward, history, log


def test_first_plan_is_all_zero_policy_with_capped_q():
    mdp, reward, history, _ = _explored(K=5)
    res = plan(history, reward, 0.1, [1], mdp=mdp)
    assert np.all(res.policies[1].action == 0)
    assert np.all(res.final_values.Q == mdp.horizon)


def test_empty_history_rejected():
    mdp, reward = random_mdp(2, 2, 2, seed=0)
    with pytest.raises(ValueError, match="empty history"):
        plan(History(), reward, 0.1, mdp=mdp)


def test_checkpoints_out_of_range_rejected():
    mdp, reward, history, _ = _explored(K=5)
    with pytest.raises(ValueError):
        plan(history, reward, 0.1, [0, 3], mdp=mdp)
    with pytest.raises(ValueError):
        plan(history, reward, 0.1, [6], mdp=mdp)


def test_plan_needs_dimensions():
    _, reward, history, _ = _explored(K=3)
    with pytest.raises(ValueError):
        plan(history, reward)


def test_incremental_replay_matches_fresh_counts():
    mdp, reward, history, _ = _explored(K=30)
    S, A, H = mdp.dims
    iota = log_factor(S, A, H, history.episodes, 0.1)
    for step in iter_plans(history, reward, 0.1, S, A):
        fresh = plan_at(VisitCounts.from_history(History(history.trajectories[: step.k - 1]), S, A), reward, iota)
        np.testing.assert_array_equal(step.values.Q, fresh.values.Q)
        np.testing.assert_array_equal(step.policy.action, fresh.policy.action)


def test_mixture_error_is_mean_of_component_errors():
    mdp, reward, history, _ = _explored(K=30)
    res = plan(history, reward, 0.1, [1, 7, 30], mdp=mdp)
    v_star = optimal_values(mdp, reward).initial_value(mdp.initial_state)
    comps = [policy_value(mdp, reward, pi).initial_value(mdp.initial_state) for pi in res.mixture.components]
    for k, err in zip(res.checkpoints, res.errors):
        assert err == pytest.approx(v_star - np.mean(comps[:k]), abs=1e-12)
        assert err >= -1e-9


def test_approximate_mixture_uses_checkpoint_policies_only():
    mdp, reward, history, _ = _explored(K=16)
    exact = plan(history, reward, 0.1, [1, 4, 16], mdp=mdp)
    approx = plan(history, reward, 0.1, [1, 4, 16], mdp=mdp, exact=False)
    assert exact.mixture_sizes == [1, 4, 16] and approx.mixture_sizes == [1, 2, 3]
    assert len(approx.mixture.components) == 3 and len(exact.mixture.components) == 16
    for k in (1, 4, 16):
        np.testing.assert_array_equal(exact.policies[k].action, approx.policies[k].action)


def test_rows_need_evaluation():
    mdp, reward, history, _ = _explored(K=4)
    res = plan(history, reward, 0.1, S=3, A=2)
    assert res.errors is None
    with pytest.raises(ValueError):
        res.rows()
    assert len(plan(history, reward, 0.1, mdp=mdp).rows()) == len(geometric_checkpoints(4))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), K=st.integers(1, 40), simplified=st.booleans())
def test_planning_q_within_bounds(seed, K, simplified):
    mode = BonusMode.SIMPLIFIED if simplified else BonusMode.FULL
    mdp, reward, history, _ = _explored(K=K, seed=seed, mode=mode)
    S, A, _ = mdp.dims
    for step in iter_plans(history, reward, 0.1, S, A, bonus_mode=mode):
        assert step.values.Q.min() >= 0.0
        assert step.values.Q.max() <= mdp.horizon


def test_optimism_in_most_runs():
    mdp, reward = random_mdp(3, 2, 3, seed=7)
    q_star = optimal_values(mdp, reward).Q
    failures = 0
    runs = 30
    for seed in range(runs):
        history, _ = explore(mdp, ExplorationConfig(rho=0.1, episodes=200, seed=seed))
        res = plan(history, reward, 0.1, [200], mdp=mdp)
        failures += bool(np.any(res.final_values.Q < q_star - 1e-9))
    assert failures / runs <= 0.17


@pytest.mark.slow
@pytest.mark.parametrize("seed", [0, 1])
def test_gridworld_mixture_error_after_ten_thousand_episodes(seed):
    env = random_gridworld(5, 10, 10, 0.4, seed)
    cfg = ExplorationConfig(rho=0.4, episodes=10_000, bonus_mode=BonusMode.SIMPLIFIED)
    history, _ = explore(env.mdp, cfg)
    res = plan(history, env.reward, 0.1, [10_000], mdp=env.mdp, bonus_mode=BonusMode.SIMPLIFIED)
    assert res.errors[-1] < 0.05 * 5
