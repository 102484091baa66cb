"""Tabular finite-horizon MDPs, rewards, policies and trajectory containers.

States and actions are dense 0-based integers.  Transitions are stationary:
``transition[x, a, y]`` is the probability of moving to ``y`` after playing
``a`` in ``x``, at every step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    BadInitialState,
    EmptyMixture,
    NegativeProbability,
    NonStochasticRow,
    ShapeMismatch,
)

ROW_TOL = 1e-9


def _frozen(arr, dtype) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class TabularMdp:
    transition: np.ndarray
    horizon: int
    initial_state: int = 0

    def __post_init__(self):
        P = _frozen(self.transition, np.float64)
        if P.ndim != 3 or P.shape[0] != P.shape[2]:
            raise ShapeMismatch(f"transition must have shape (S, A, S), got {P.shape}")
        if self.horizon < 1:
            raise ShapeMismatch("horizon must be positive")
        object.__setattr__(self, "transition", P)
        object.__setattr__(self, "horizon", int(self.horizon))
        object.__setattr__(self, "initial_state", int(self.initial_state))

    @property
    def num_states(self) -> int:
        return self.transition.shape[0]

    @property
    def num_actions(self) -> int:
        return self.transition.shape[1]

    @property
    def dims(self) -> tuple[int, int, int]:
        """(S, A, H)"""
        return self.num_states, self.num_actions, self.horizon

    @cached_property
    def _cdf(self) -> np.ndarray:
        P = self.transition
        cdf = np.cumsum(P, axis=2)
        # rounding slack goes to the last reachable successor, never to a zero-probability one
        S = P.shape[2]
        last = S - 1 - np.argmax(P[..., ::-1] > 0, axis=2)
        cdf[np.arange(S)[None, None, :] >= last[..., None]] = np.inf
        return cdf


@dataclass(frozen=True, eq=False)
class RewardFn:
    """Deterministic reward table ``r[h, x, a]`` with entries in [0, 1]."""

    r: np.ndarray
    name: str = "reward"

    def __post_init__(self):
        r = _frozen(self.r, np.float64)
        if r.ndim != 3:
            raise ShapeMismatch(f"reward must have shape (H, S, A), got {r.shape}")
        if np.any(r < 0) or np.any(r > 1):
            raise ValueError("reward entries must lie in [0, 1]")
        object.__setattr__(self, "r", r)

    @classmethod
    def zeros(cls, S: int, A: int, H: int) -> "RewardFn":
        return cls(np.zeros((H, S, A)), name="zero")

    def check_matches(self, mdp: TabularMdp) -> None:
        S, A, H = mdp.dims
        if self.r.shape != (H, S, A):
            raise ShapeMismatch(f"reward shape {self.r.shape} does not match (H, S, A)=({H}, {S}, {A})")


@dataclass(frozen=True, eq=False)
class DeterministicPolicy:
    """Step-dependent deterministic policy, ``action[h, x]``."""

    action: np.ndarray

    def __post_init__(self):
        act = _frozen(self.action, np.int64)
        if act.ndim != 2:
            raise ShapeMismatch("policy must have shape (H, S)")
        object.__setattr__(self, "action", act)

    def check_matches(self, mdp: TabularMdp) -> None:
        S, A, H = mdp.dims
        if self.action.shape != (H, S):
            raise ShapeMismatch(f"policy shape {self.action.shape} does not match (H, S)=({H}, {S})")
        if np.any(self.action < 0) or np.any(self.action >= A):
            raise ShapeMismatch("policy uses an action index out of range")

    def __eq__(self, other):
        if not isinstance(other, DeterministicPolicy):
            return NotImplemented
        return np.array_equal(self.action, other.action)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class MixturePolicy:
    """Uniform mixture over deterministic policies.

    Components are stored stacked as ``actions[i, h, x]``.
    """

    actions: np.ndarray

    def __post_init__(self):
        acts = _frozen(self.actions, np.int64)
        if acts.ndim != 3:
            raise ShapeMismatch("mixture actions must have shape (n, H, S)")
        if acts.shape[0] == 0:
            raise EmptyMixture("mixture needs at least one component")
        object.__setattr__(self, "actions", acts)

    @classmethod
    def of(cls, policies: Sequence[DeterministicPolicy]) -> "MixturePolicy":
        if len(policies) == 0:
            raise EmptyMixture("mixture needs at least one component")
        return cls(np.stack([p.action for p in policies]))

    def __len__(self) -> int:
        return self.actions.shape[0]

    @property
    def components(self) -> list[DeterministicPolicy]:
        return [DeterministicPolicy(a) for a in self.actions]

    def draw(self, rng: np.random.Generator) -> DeterministicPolicy:
        return DeterministicPolicy(self.actions[rng.integers(len(self))])


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One episode: ``states[h]``, ``actions[h]`` and the state reached after step h."""

    states: np.ndarray
    actions: np.ndarray
    next_states: np.ndarray

    def __post_init__(self):
        for name in ("states", "actions", "next_states"):
            object.__setattr__(self, name, _frozen(getattr(self, name), np.int64))
        if not (self.states.shape == self.actions.shape == self.next_states.shape):
            raise ShapeMismatch("trajectory arrays must have equal length")

    def __len__(self) -> int:
        return len(self.states)

    @property
    def steps(self) -> list[tuple[int, int]]:
        return list(zip(self.states.tolist(), self.actions.tolist()))

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            np.array_equal(self.states, other.states)
            and np.array_equal(self.actions, other.actions)
            and np.array_equal(self.next_states, other.next_states)
        )

    __hash__ = None


@dataclass
class History:
    trajectories: list[Trajectory] = field(default_factory=list)

    @property
    def episodes(self) -> int:
        return len(self.trajectories)

    def __len__(self) -> int:
        return len(self.trajectories)

    def __iter__(self) -> Iterator[Trajectory]:
        return iter(self.trajectories)

    def append(self, traj: Trajectory) -> None:
        self.trajectories.append(traj)

    def __eq__(self, other):
        if not isinstance(other, History):
            return NotImplemented
        return len(self) == len(other) and all(a == b for a, b in zip(self, other))


def validate_mdp(mdp: TabularMdp) -> None:
    """Raise if ``mdp`` is not a well-formed stochastic environment."""
    P = mdp.transition
    if np.any(P < 0):
        x, a, y = np.argwhere(P < 0)[0]
        raise NegativeProbability(f"P[{x}][{a}][{y}] = {P[x, a, y]!r} is negative")
    if np.any(P > 1):
        x, a, y = np.argwhere(P > 1)[0]
        raise NegativeProbability(f"P[{x}][{a}][{y}] = {P[x, a, y]!r} exceeds 1")
    sums = P.sum(axis=2)
    bad = np.abs(sums - 1.0) > ROW_TOL
    if np.any(bad):
        x, a = np.argwhere(bad)[0]
        raise NonStochasticRow(int(x), int(a), float(sums[x, a]))
    if not 0 <= mdp.initial_state < mdp.num_states:
        raise BadInitialState(f"initial state {mdp.initial_state} not in [0, {mdp.num_states})")


def sample_next(mdp: TabularMdp, x: int, a: int, rng: np.random.Generator) -> int:
    """Draw the next state from ``P[x, a, :]`` by inverse-CDF sampling."""
    return int(np.searchsorted(mdp._cdf[x, a], rng.random(), side="right"))


def rollout(mdp: TabularMdp, policy: DeterministicPolicy, rng: np.random.Generator) -> Trajectory:
    H = mdp.horizon
    states = np.empty(H, dtype=np.int64)
    actions = np.empty(H, dtype=np.int64)
    nxt = np.empty(H, dtype=np.int64)
    x = mdp.initial_state
    for h in range(H):
        a = int(policy.action[h, x])
        y = sample_next(mdp, x, a, rng)
        states[h], actions[h], nxt[h] = x, a, y
        x = y
    return Trajectory(states, actions, nxt)


def episode_rng(seed: int, episode: int, run: int = 0) -> np.random.Generator:
    """Independent stream for one episode of one run."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(run, episode)))
