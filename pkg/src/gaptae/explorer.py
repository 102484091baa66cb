"""Reward-free exploration driven by a clipped UCB bonus.

Each episode rebuilds the empirical model from the counts so far, computes
the exploration bonus, solves a capped optimistic dynamic program with zero
reward and acts greedily on it.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .counts import VisitCounts, empirical_transition
from .dp import ValueTables, clip, greedy_policy
from .errors import ShapeMismatch
from .mdp import History, TabularMdp, episode_rng, rollout, validate_mdp

log = logging.getLogger(__name__)


class BonusMode(str, enum.Enum):
    FULL = "full"
    SIMPLIFIED = "simplified"


@dataclass(frozen=True)
class ExplorationConfig:
    rho: float
    episodes: int
    delta: float = 0.1
    bonus_mode: BonusMode = BonusMode.FULL
    seed: int = 0
    clip: bool = True

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.episodes < 1:
            raise ValueError("need at least one episode")
        object.__setattr__(self, "bonus_mode", BonusMode(self.bonus_mode))


def log_factor(S: int, A: int, H: int, K: int, delta: float) -> float:
    """The shared confidence log term ``log(2 H S^2 A K / delta)``."""
    return math.log(2 * H * S * S * A * K / delta)


def exploration_bonus(counts: VisitCounts, cfg: ExplorationConfig, dims: tuple[int, int, int]) -> np.ndarray:
    """Per-pair exploration bonus; unvisited pairs get the sentinel H."""
    S, A, H = dims
    n = counts.n_sa
    visited = n > 0
    nn = np.where(visited, n, 1).astype(np.float64)
    threshold = cfg.rho / (2 * H) if cfg.clip else 0.0
    if cfg.bonus_mode is BonusMode.FULL:
        iota = log_factor(S, A, H, cfg.episodes, cfg.delta)
        lead = np.sqrt(8 * H**2 * iota / nn)
        bonus = clip(lead, threshold) + 120 * (S + H) * H**3 * iota / nn + 240 * H**6 * S**2 * iota**2 / nn**2
    else:
        lead = np.sqrt(H**2 / nn)
        bonus = clip(lead, threshold) + (S + H) * H**3 / nn
    return np.where(visited, bonus, float(H))


def ucbq(
    p_hat: np.ndarray,
    reward: Optional[np.ndarray],
    bonus: np.ndarray,
    horizon: int,
    unvisited: Optional[np.ndarray] = None,
) -> ValueTables:
    """Optimistic backward induction ``Q = min(H, r + bonus + P_hat V')``.

    ``reward`` is an (H, S, A) table or None for the all-zero reward.  The
    uncapped values are kept in ``Q_raw`` to order ties at the cap; pairs in
    ``unvisited`` rank above everything there.
    """
    H = horizon
    S, A, _ = p_hat.shape
    if bonus.shape != (S, A):
        raise ShapeMismatch(f"bonus shape {bonus.shape} != {(S, A)}")
    Q = np.empty((H, S, A))
    Q_raw = np.empty((H, S, A))
    V = np.zeros((H + 1, S))
    for h in range(H - 1, -1, -1):
        raw = bonus + p_hat @ V[h + 1]
        if reward is not None:
            raw = raw + reward[h]
        Q_raw[h] = raw
        Q[h] = np.minimum(H, raw)
        V[h] = Q[h].max(axis=1)
    if unvisited is not None:
        Q_raw[:, unvisited] = np.inf
    return ValueTables(Q, V, Q_raw)


def bonus_policy_value(p_hat: np.ndarray, bonus: np.ndarray, policy_actions: np.ndarray, horizon: int) -> np.ndarray:
    """Capped cumulative bonus of a fixed policy under ``p_hat``; returns V of shape (H + 1, S)."""
    H = horizon
    S = p_hat.shape[0]
    rows = np.arange(S)
    V = np.zeros((H + 1, S))
    for h in range(H - 1, -1, -1):
        Q = np.minimum(H, bonus + p_hat @ V[h + 1])
        V[h] = Q[rows, policy_actions[h]]
    return V


@dataclass
class ExplorationLog:
    values: np.ndarray  # V-bar^k_1(x_1) for k = 1..K
    snapshots: dict[int, VisitCounts] = field(default_factory=dict)  # counts before episode k
    iota: float = float("nan")
    final_counts: Optional[VisitCounts] = None


def explore(
    mdp: TabularMdp,
    cfg: ExplorationConfig,
    checkpoints: Iterable[int] = (),
    history: Optional[History] = None,
) -> tuple[History, ExplorationLog]:
    """Run ``cfg.episodes`` exploration episodes; deterministic given ``cfg.seed``."""
    validate_mdp(mdp)
    S, A, H = mdp.dims
    K = cfg.episodes
    wanted = {int(k) for k in checkpoints if 1 <= int(k) <= K}
    counts = VisitCounts.empty(S, A)
    history = History() if history is None else history
    values = np.empty(K)
    snapshots: dict[int, VisitCounts] = {}
    for k in range(1, K + 1):
        if k in wanted:
            snapshots[k] = counts.copy()
        p_hat = empirical_transition(counts)
        bonus = exploration_bonus(counts, cfg, (S, A, H))
        vt = ucbq(p_hat, None, bonus, H, unvisited=counts.n_sa == 0)
        values[k - 1] = vt.V[0, mdp.initial_state]
        traj = rollout(mdp, greedy_policy(vt), episode_rng(cfg.seed, k))
        counts.absorb(traj)
        history.append(traj)
    iota = log_factor(S, A, H, K, cfg.delta)
    log.debug("explored %d episodes, final V-bar %.4g", K, values[-1])
    return history, ExplorationLog(values, snapshots, iota, counts)
