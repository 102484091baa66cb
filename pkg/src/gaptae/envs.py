"""Environment generators: the lower-bound hard instance, a random grid
world with a known gap, bandits as one-step MDPs, and random tiny MDPs."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .dp import gaps
from .errors import InfeasibleParams
from .mdp import RewardFn, TabularMdp, validate_mdp

log = logging.getLogger(__name__)


@dataclass
class Env:
    """A generated environment plus its state-role layout and generator metadata.

    Unpacks as ``mdp, reward = env``.
    """

    mdp: TabularMdp
    reward: RewardFn
    layout: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def __iter__(self) -> Iterator:
        return iter((self.mdp, self.reward))


def tree_depth(S: int, A: int) -> int:
    d, width = 0, 1
    while width < S:
        d += 1
        width *= A
    return d


def hard_instance(
    S: int,
    A: int,
    H: int,
    rho: float,
    epsilon: float,
    routing: str = "uniform",
    type_i: int = 0,
    type_ii: int = 1,
) -> Env:
    """Layered lower-bound MDP: a routing tree over S bandit-like models.

    Model ``type_i`` has one action (index 0) at its left orange state that
    reaches the rewarding blue state w.p. 1/2 + rho/(2H), model ``type_ii``
    has one with 1/2 + rho/H, the rest are fair coins.  Reward 1 is paid at
    every step spent in the left blue state, which is entered with exactly H
    steps to go, so the horizon is ``depth + 2 + H``.

    ``routing="uniform"`` sends the agent to each leaf with probability 1/S
    whatever it plays, so the only decisions with a gap are at the left
    orange states.  ``routing="action"`` makes action a pick child a.
    """
    if S < 5 or A < 2 or H < 2:
        raise InfeasibleParams("need S >= 5, A >= 2, H >= 2")
    if not 0 < epsilon < rho:
        raise InfeasibleParams("need 0 < epsilon < rho")
    if 0.5 + rho / H > 1:
        raise InfeasibleParams(f"rho={rho} too large for H={H}: 1/2 + rho/H exceeds 1")
    if routing not in ("uniform", "action"):
        raise ValueError(f"unknown routing {routing!r}")
    if type_i == type_ii or not (0 <= type_i < S and 0 <= type_ii < S):
        raise InfeasibleParams("type I and type II must be distinct leaves")

    d = tree_depth(S, A)
    level_sizes = [-(-S // A ** (d - lvl)) for lvl in range(d)]  # ceil division
    level_start = np.concatenate([[0], np.cumsum(level_sizes)]).astype(int)
    n_tree = int(level_start[-1])
    green = n_tree + np.arange(S)
    left_orange = n_tree + S + np.arange(S)
    right_orange = n_tree + 2 * S
    left_blue, right_blue = right_orange + 1, right_orange + 2
    n_states = right_blue + 1

    P = np.zeros((n_states, A, n_states))

    def node_index(lvl: int, j: int) -> int:
        return int(green[j]) if lvl == d else int(level_start[lvl] + j)

    def leaves_under(lvl: int, j: int) -> int:
        span = A ** (d - lvl)
        return min((j + 1) * span, S) - j * span

    for lvl in range(d):
        n_next = S if lvl + 1 == d else level_sizes[lvl + 1]
        for i in range(level_sizes[lvl]):
            x = node_index(lvl, i)
            children = list(range(i * A, min(i * A + A, n_next)))
            if routing == "uniform":
                w = np.array([leaves_under(lvl + 1, j) for j in children], dtype=float)
                w /= w.sum()
                for j, p in zip(children, w):
                    P[x, :, node_index(lvl + 1, j)] = p
            else:
                for a in range(A):
                    j = min(i * A + a, children[-1])
                    P[x, a, node_index(lvl + 1, j)] = 1.0

    q = epsilon / rho
    for m in range(S):
        P[green[m], :, left_orange[m]] = q
        P[green[m], :, right_orange] = 1.0 - q
        P[left_orange[m], :, left_blue] = 0.5
        P[left_orange[m], :, right_blue] = 0.5
    for m, boost in ((type_i, rho / (2 * H)), (type_ii, rho / H)):
        P[left_orange[m], 0, left_blue] = 0.5 + boost
        P[left_orange[m], 0, right_blue] = 0.5 - boost
    for x in (right_orange, left_blue, right_blue):
        P[x, :, x] = 1.0

    H_tot = d + 2 + H
    r = np.zeros((H_tot, n_states, A))
    r[:, left_blue, :] = 1.0
    mdp = TabularMdp(P, H_tot, initial_state=0)
    validate_mdp(mdp)
    layout = {
        "tree": list(range(n_tree)),
        "green": green.tolist(),
        "left_orange": left_orange.tolist(),
        "right_orange": [int(right_orange)],
        "left_blue": [int(left_blue)],
        "right_blue": [int(right_blue)],
        "type_I": int(type_i),
        "type_II": int(type_ii),
        "depth": d,
        "orange_step": d + 1,  # 0-based step at which left orange states are occupied
    }
    info = {
        "kind": "hard",
        "S": S, "A": A, "H": H, "rho": rho, "epsilon": epsilon, "routing": routing,
        "num_states": int(n_states), "horizon": H_tot,
        "state_budget": 2 * S + n_tree + S,  # 2S + tree nodes (internal + leaves)
    }
    return Env(mdp, RewardFn(r, name="left_blue"), layout, info)


def _gridworld_once(H: int, S: int, A: int, rho: float, rng: np.random.Generator):
    x0 = 0
    x_star = int(rng.integers(1, S))
    a_star = int(rng.integers(A))
    P = rng.uniform(size=(S, A, S))
    P[:, :, x0] = 0.0
    P[:, :, x_star] = 0.0
    P /= P.sum(axis=2, keepdims=True)
    P[x0, a_star] *= 1.0 - rho
    P[x0, a_star, x_star] = rho
    P[x_star, a_star] = 0.0
    P[x_star, a_star, x_star] = 1.0
    r = np.zeros((H, S, A))
    r[:, x_star, :] = 1.0
    return P, r, x_star, a_star


def random_gridworld(H: int, S: int, A: int, rho: float, seed: int, max_tries: int = 1000) -> Env:
    """Random MDP with a single rewarding absorbing-by-choice state.

    The start state can never be re-entered and the goal x* is reachable only
    by the special action a*, from the start (w.p. rho) or from x* itself
    (w.p. 1).  Other entries are uniform(0, 1) draws, renormalised.  Draws
    whose exact gap falls below rho are rejected and redrawn.
    """
    if S < 3 or A < 1:
        raise InfeasibleParams("grid world needs S >= 3 and A >= 1")
    if not 0 < rho <= 1:
        raise InfeasibleParams("rho must lie in (0, 1]")
    for attempt in range(max_tries):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(attempt,)))
        P, r, x_star, a_star = _gridworld_once(H, S, A, rho, rng)
        mdp = TabularMdp(P, H, initial_state=0)
        validate_mdp(mdp)
        reward = RewardFn(r, name="goal")
        report = gaps(mdp, reward, rho_claim=rho)
        if report.rho_ok:
            if attempt:
                log.info("grid world seed %d: %d draws rejected for gap < rho", seed, attempt)
            layout = {"start": [0], "goal": [x_star], "special_action": a_star}
            info = {
                "kind": "gridworld", "H": H, "S": S, "A": A, "rho": rho, "seed": seed,
                "rejections": attempt, "gap_min": report.gap_min,
            }
            return Env(mdp, reward, layout, info)
    raise InfeasibleParams(f"no grid world with gap >= {rho} in {max_tries} draws")


def bandit_as_mdp(means: Sequence[float]) -> Env:
    """A-armed bandit as a one-state, one-step MDP."""
    means = np.asarray(means, dtype=np.float64)
    if means.ndim != 1 or means.size == 0:
        raise ValueError("need a non-empty list of arm means")
    A = means.size
    mdp = TabularMdp(np.ones((1, A, 1)), 1, 0)
    reward = RewardFn(means.reshape(1, 1, A), name="means")
    return Env(mdp, reward, {}, {"kind": "bandit", "means": means.tolist()})


def random_mdp(S: int, A: int, H: int, seed, sparse: bool = False) -> Env:
    """Dirichlet transitions and uniform rewards; handy for property tests."""
    rng = np.random.default_rng(seed)
    P = rng.dirichlet(np.full(S, 0.5 if sparse else 1.0), size=(S, A))
    r = rng.uniform(size=(H, S, A))
    return Env(TabularMdp(P, H, int(rng.integers(S))), RewardFn(r, name="random"), {}, {"kind": "random"})


def random_gapped_mdp(S: int, A: int, H: int, rho: float, seed: int, max_tries: int = 100_000) -> Env:
    """Random MDP whose gap over every (h, x) pair, reachable or not, is at least rho.

    Rewards take values in {0, 1/2, 1} and transitions mix a random
    deterministic successor with Dirichlet noise; draws are rejected until the
    gap condition holds.
    """
    rng = np.random.default_rng(seed)
    for attempt in range(max_tries):
        succ = rng.integers(S, size=(S, A))
        P = 0.5 * rng.dirichlet(np.ones(S), size=(S, A))
        P[np.arange(S)[:, None], np.arange(A)[None, :], succ] += 0.5
        r = rng.integers(0, 3, size=(H, S, A)) / 2.0
        mdp = TabularMdp(P, H, 0)
        reward = RewardFn(r, name="random")
        report = gaps(mdp, reward, rho_claim=rho, reachable_only=False)
        if report.rho_ok and np.isfinite(report.gap_min):
            return Env(mdp, reward, {}, {"kind": "random_gapped", "gap_min": report.gap_min, "tries": attempt + 1})
    raise InfeasibleParams(f"no MDP with gap >= {rho} in {max_tries} draws")
