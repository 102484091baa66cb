"""Optimistic planning on an exploration history for a revealed reward.

For every episode index k the planner rebuilds the empirical model from the
first k - 1 trajectories, adds a Hoeffding bonus to the reward, solves the
capped optimistic program and keeps the greedy policy.  The returned policy
is the uniform mixture of those greedy policies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .counts import VisitCounts, empirical_transition
from .dp import ValueTables, greedy_policy, optimal_values, policy_values_batch
from .explorer import BonusMode, log_factor, ucbq
from .mdp import DeterministicPolicy, History, MixturePolicy, RewardFn, TabularMdp


def planning_bonus(counts: VisitCounts, iota: float, H: int, mode: BonusMode = BonusMode.FULL) -> np.ndarray:
    """``sqrt(H^2 iota / (2 N))`` per pair, with the sentinel H where N = 0.

    The simplified mode drops the constant and the log factor: ``H / sqrt(N)``.
    """
    n = counts.n_sa
    nn = np.where(n > 0, n, 1).astype(np.float64)
    if BonusMode(mode) is BonusMode.SIMPLIFIED:
        width = np.sqrt(H**2 / nn)
    else:
        width = np.sqrt(H**2 * iota / (2 * nn))
    return np.where(n > 0, width, float(H))


def geometric_checkpoints(K: int, base: int = 2) -> list[int]:
    out, k = [], 1
    while k < K:
        out.append(k)
        k *= base
    out.append(K)
    return out


@dataclass(frozen=True)
class PlanStep:
    k: int
    values: ValueTables
    policy: DeterministicPolicy


def iter_plans(
    history: History,
    reward: RewardFn,
    delta: float,
    S: int,
    A: int,
    upto: Optional[int] = None,
    bonus_mode: BonusMode = BonusMode.FULL,
) -> Iterator[PlanStep]:
    """Yield the optimistic plan for k = 1..upto using the first k - 1 episodes."""
    K = history.episodes
    if K == 0:
        raise ValueError("empty history")
    H = reward.r.shape[0]
    if reward.r.shape != (H, S, A):
        raise ValueError(f"reward shape {reward.r.shape} does not match (H, S, A)=({H}, {S}, {A})")
    iota = log_factor(S, A, H, K, delta)
    upto = K if upto is None else upto
    counts = VisitCounts.empty(S, A)
    for k in range(1, upto + 1):
        if k > 1:
            counts.absorb(history.trajectories[k - 2])
        bonus = planning_bonus(counts, iota, H, bonus_mode)
        vt = ucbq(empirical_transition(counts), reward.r, bonus, H, unvisited=counts.n_sa == 0)
        yield PlanStep(k, vt, greedy_policy(vt))


def plan_at(
    counts: VisitCounts, reward: RewardFn, iota: float, bonus_mode: BonusMode = BonusMode.FULL
) -> PlanStep:
    """One optimistic plan from a counts snapshot."""
    H = reward.r.shape[0]
    bonus = planning_bonus(counts, iota, H, bonus_mode)
    vt = ucbq(empirical_transition(counts), reward.r, bonus, H, unvisited=counts.n_sa == 0)
    return PlanStep(counts.episodes_absorbed + 1, vt, greedy_policy(vt))


@dataclass
class PlanningResult:
    checkpoints: list[int]
    policies: dict[int, DeterministicPolicy]  # pi^k at each checkpoint
    mixture: MixturePolicy  # over every computed pi^j, j <= final checkpoint
    mixture_sizes: list[int]
    exact: bool
    errors: Optional[list[float]] = None  # V*_1(x_1) - V^mixture_1(x_1) per checkpoint
    optimal_value: Optional[float] = None
    final_values: Optional[ValueTables] = None

    def rows(self) -> list[dict]:
        if self.errors is None:
            raise ValueError("planning result was not evaluated against a model")
        return [
            {"checkpoint_k": k, "planning_error": e, "mixture_size": m, "optimal_value": self.optimal_value}
            for k, e, m in zip(self.checkpoints, self.errors, self.mixture_sizes)
        ]


def plan(
    history: History,
    reward: RewardFn,
    delta: float = 0.1,
    checkpoints: Optional[Sequence[int]] = None,
    S: Optional[int] = None,
    A: Optional[int] = None,
    exact: bool = True,
    mdp: Optional[TabularMdp] = None,
    bonus_mode: BonusMode = BonusMode.FULL,
) -> PlanningResult:
    """Plan for ``reward`` and optionally score the mixture against ``mdp``.

    ``exact`` keeps every pi^k (the true uniform mixture at each checkpoint);
    otherwise only checkpoint policies are computed and mixed, which is a
    cheaper approximation.  ``mdp`` is used only in the separate evaluation
    step, never for planning.  ``bonus_mode`` should match the one used
    during exploration.
    """
    if history.episodes == 0:
        raise ValueError("empty history")
    if S is None or A is None:
        if mdp is None:
            raise ValueError("need S and A, or an mdp to read them from")
        S, A = mdp.num_states, mdp.num_actions
    K = history.episodes
    cps = sorted(set(geometric_checkpoints(K) if checkpoints is None else (int(c) for c in checkpoints)))
    if not cps or cps[0] < 1 or cps[-1] > K:
        raise ValueError(f"checkpoints must lie in [1, {K}]")
    wanted = set(cps)
    H = reward.r.shape[0]
    policies: dict[int, DeterministicPolicy] = {}
    stack: list[np.ndarray] = []
    final_values = None
    if exact:
        for step in iter_plans(history, reward, delta, S, A, upto=cps[-1], bonus_mode=bonus_mode):
            stack.append(step.policy.action)
            if step.k in wanted:
                policies[step.k] = step.policy
                final_values = step.values
        sizes = list(cps)
    else:
        iota = log_factor(S, A, H, K, delta)
        counts = VisitCounts.empty(S, A)
        done = 0
        for k in cps:
            while done < k - 1:
                counts.absorb(history.trajectories[done])
                done += 1
            step = plan_at(counts, reward, iota, bonus_mode)
            policies[k] = step.policy
            stack.append(step.policy.action)
            final_values = step.values
        sizes = list(range(1, len(cps) + 1))
    actions = np.stack(stack)
    result = PlanningResult(cps, policies, MixturePolicy(actions), sizes, exact, final_values=final_values)
    if mdp is not None:
        evaluate(result, mdp, reward)
    return result


def evaluate(result: PlanningResult, mdp: TabularMdp, reward: RewardFn) -> PlanningResult:
    """Fill in the exact mixture planning error at each checkpoint."""
    v_star = optimal_values(mdp, reward).initial_value(mdp.initial_state)
    comp = policy_values_batch(mdp, reward, result.mixture.actions)
    running = np.cumsum(comp)
    result.errors = [float(v_star - running[m - 1] / m) for m in result.mixture_sizes]
    result.optimal_value = float(v_star)
    return result
