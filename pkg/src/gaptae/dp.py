"""Exact finite-horizon dynamic programming on a known model.

Everything here is ground truth: optimal and policy values, sub-optimality
gaps, the clip operator, and a brute-force policy enumerator used as a test
oracle.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EmptyMixture, TooLarge
from .mdp import DeterministicPolicy, MixturePolicy, RewardFn, TabularMdp

GAP_EPS = 1e-12
BRUTE_FORCE_LIMIT = 10**6


@dataclass(frozen=True, eq=False)
class ValueTables:
    """Q has shape (H, S, A); V has shape (H + 1, S) with ``V[H] == 0``.

    ``Q_raw`` is only set by capped dynamic programs and keeps the value
    before the cap; greedy extraction uses it to order capped ties.
    """

    Q: np.ndarray
    V: np.ndarray
    Q_raw: Optional[np.ndarray] = None

    @property
    def horizon(self) -> int:
        return self.Q.shape[0]

    def initial_value(self, x1: int) -> float:
        return float(self.V[0, x1])


@dataclass(frozen=True, eq=False)
class GapReport:
    gap: np.ndarray
    gap_min: float
    rho_claim: Optional[float] = None

    @property
    def rho_ok(self) -> Optional[bool]:
        """Whether ``0 < rho_claim <= gap_min``; None when no claim was made."""
        if self.rho_claim is None:
            return None
        return 0 < self.rho_claim <= self.gap_min


def lex_argmax(Q: np.ndarray, tiebreak: Optional[np.ndarray] = None) -> np.ndarray:
    """Argmax over the last axis; ties go to the larger ``tiebreak``, then the smallest index."""
    if tiebreak is None:
        return np.argmax(Q, axis=-1)
    top = Q == Q.max(axis=-1, keepdims=True)
    return np.argmax(np.where(top, tiebreak, -np.inf), axis=-1)


def greedy_policy(values: ValueTables) -> DeterministicPolicy:
    return DeterministicPolicy(lex_argmax(values.Q, values.Q_raw))


def optimal_values(mdp: TabularMdp, reward: RewardFn) -> ValueTables:
    reward.check_matches(mdp)
    S, A, H = mdp.dims
    P, r = mdp.transition, reward.r
    Q = np.zeros((H, S, A))
    V = np.zeros((H + 1, S))
    for h in range(H - 1, -1, -1):
        Q[h] = r[h] + P @ V[h + 1]
        V[h] = Q[h].max(axis=1)
    return ValueTables(Q, V)


def policy_value(mdp: TabularMdp, reward: RewardFn, policy: DeterministicPolicy) -> ValueTables:
    reward.check_matches(mdp)
    policy.check_matches(mdp)
    S, A, H = mdp.dims
    P, r = mdp.transition, reward.r
    Q = np.zeros((H, S, A))
    V = np.zeros((H + 1, S))
    rows = np.arange(S)
    for h in range(H - 1, -1, -1):
        Q[h] = r[h] + P @ V[h + 1]
        V[h] = Q[h][rows, policy.action[h]]
    return ValueTables(Q, V)


def policy_values_batch(mdp: TabularMdp, reward: RewardFn, actions: np.ndarray) -> np.ndarray:
    """``V^pi_1(x_1)`` for a stack of policies ``actions[n, h, x]`` at once."""
    S, A, H = mdp.dims
    P, r = mdp.transition, reward.r
    n = actions.shape[0]
    V = np.zeros((n, S))
    for h in range(H - 1, -1, -1):
        Q = r[h][None] + np.einsum("xay,ny->nxa", P, V)
        V = np.take_along_axis(Q, actions[:, h, :, None], axis=2)[..., 0]
    return V[:, mdp.initial_state]


def mixture_value(mdp: TabularMdp, reward: RewardFn, mix: MixturePolicy) -> float:
    """Expected initial value of a policy drawn uniformly from ``mix``."""
    if len(mix) == 0:
        raise EmptyMixture("mixture needs at least one component")
    return float(np.mean(policy_values_batch(mdp, reward, mix.actions)))


def reachable(mdp: TabularMdp) -> np.ndarray:
    """Boolean ``(H, S)``: can state x be occupied at step h under some policy."""
    S, A, H = mdp.dims
    succ = (mdp.transition > 0).any(axis=1)  # (S, S'): some action moves x -> y
    out = np.zeros((H, S), dtype=bool)
    out[0, mdp.initial_state] = True
    for h in range(1, H):
        out[h] = succ[out[h - 1]].any(axis=0)
    return out


def gaps(
    mdp: TabularMdp,
    reward: RewardFn,
    rho_claim: Optional[float] = None,
    reachable_only: bool = True,
) -> GapReport:
    """Sub-optimality gaps ``V*_h(x) - Q*_h(x, a)`` and their smallest positive value.

    The full table is always returned.  ``gap_min`` ranges over (h, x) pairs
    that can actually be occupied unless ``reachable_only`` is False.
    Entries below ``GAP_EPS`` count as zero; an empty positive set gives inf.
    """
    vt = optimal_values(mdp, reward)
    gap = np.maximum(vt.V[:-1, :, None] - vt.Q, 0.0)
    gap[gap < GAP_EPS] = 0.0
    pool = gap[reachable(mdp)] if reachable_only else gap
    positive = pool[pool > 0]
    gap_min = float(positive.min()) if positive.size else math.inf
    return GapReport(gap, gap_min, rho_claim)


def clip(z, rho):
    """``z`` if ``z >= rho`` else 0 (elementwise for arrays)."""
    if np.ndim(z) == 0 and np.ndim(rho) == 0:
        return z if z >= rho else 0.0 * z
    z = np.asarray(z, dtype=np.float64)
    return np.where(z >= rho, z, 0.0)


def brute_force_optimal(mdp: TabularMdp, reward: RewardFn) -> float:
    """Best ``V^pi_1(x_1)`` over every deterministic policy, by enumeration."""
    S, A, H = mdp.dims
    if A ** (S * H) > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"{A}^{S * H} policies exceed the enumeration limit {BRUTE_FORCE_LIMIT}")
    best = -math.inf
    chunk = []
    for combo in itertools.product(range(A), repeat=S * H):
        chunk.append(combo)
        if len(chunk) == 4096:
            best = max(best, _chunk_best(mdp, reward, chunk))
            chunk = []
    if chunk:
        best = max(best, _chunk_best(mdp, reward, chunk))
    return best


def _chunk_best(mdp, reward, chunk) -> float:
    # forward occupancy propagation, deliberately not sharing code with the backward DP
    S, A, H = mdp.dims
    acts = np.asarray(chunk, dtype=np.int64).reshape(-1, H, S)
    n = acts.shape[0]
    occ = np.zeros((n, S))
    occ[:, mdp.initial_state] = 1.0
    total = np.zeros(n)
    for h in range(H):
        r_pi = reward.r[h][np.arange(S)[None, :], acts[:, h, :]]  # (n, S)
        total += (occ * r_pi).sum(axis=1)
        P_pi = mdp.transition[np.arange(S)[None, :], acts[:, h, :]]  # (n, S, S)
        occ = np.einsum("nx,nxy->ny", occ, P_pi)
    return float(total.max())
