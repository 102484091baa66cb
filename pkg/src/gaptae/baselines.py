"""Comparators: uniform bandit exploration, uniform sampling with a
generative model, and exploration without the clipped bonus."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .dp import greedy_policy, optimal_values
from .explorer import ExplorationConfig, explore
from .mdp import DeterministicPolicy, RewardFn, TabularMdp

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BernoulliBandit:
    means: tuple[float, ...]

    def __post_init__(self):
        means = tuple(float(m) for m in self.means)
        if not means:
            raise ValueError("bandit needs at least one arm")
        if any(not 0 <= m <= 1 for m in means):
            raise ValueError("Bernoulli means must lie in [0, 1]")
        object.__setattr__(self, "means", means)

    @property
    def num_arms(self) -> int:
        return len(self.means)

    def pull(self, arm: int, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.random(n) < self.means[arm]


def mab_uniform_explore(bandit: BernoulliBandit, T: int, rng: np.random.Generator) -> int:
    """Pull every arm ``T // A`` times and return the best empirical arm."""
    A = bandit.num_arms
    if T < A:
        raise ValueError(f"budget T={T} is smaller than the number of arms {A}")
    per_arm = T // A
    if per_arm * A != T:
        log.info("T=%d not divisible by A=%d; using %d pulls per arm", T, A, per_arm)
    empirical = np.array([bandit.pull(a, per_arm, rng).mean() for a in range(A)])
    return int(np.argmax(empirical))


def sample_transitions(mdp: TabularMdp, samples_per_pair: int, rng: np.random.Generator) -> np.ndarray:
    """Draw N next states at every pair from the simulator; returns the counts (S, A, S)."""
    S, A, _ = mdp.dims
    out = np.empty((S, A, S), dtype=np.int64)
    for x in range(S):
        for a in range(A):
            out[x, a] = rng.multinomial(samples_per_pair, mdp.transition[x, a])
    return out


def simulator_uniform(
    mdp: TabularMdp, reward: RewardFn, samples_per_pair: int, rng: np.random.Generator
) -> DeterministicPolicy:
    """Plug-in planning on an empirical model estimated with N samples per pair."""
    if samples_per_pair < 1:
        raise ValueError("need at least one sample per pair")
    counts = sample_transitions(mdp, samples_per_pair, rng)
    p_hat = counts / samples_per_pair
    model = TabularMdp(p_hat, mdp.horizon, mdp.initial_state)
    return greedy_policy(optimal_values(model, reward))


def simulator_sample_bound(S: int, A: int, H: int, rho: float, delta: float) -> int:
    """Total sample count above which plug-in planning is exactly optimal w.p. 1 - delta."""
    return math.ceil(2 * H**4 * S * A / rho**2 * math.log(2 * H * S * A / delta))


def mab_sample_budget(A: int, rho: float, delta: float) -> int:
    return A * math.ceil(math.log(A / delta) / rho**2)


def unclipped_explore(mdp: TabularMdp, cfg: ExplorationConfig, checkpoints: Sequence[int] = ()):
    """Same exploration loop with the clip threshold removed."""
    return explore(mdp, replace(cfg, clip=False), checkpoints)
