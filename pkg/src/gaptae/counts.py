"""Visit counts and the empirical transition model built from them."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .mdp import History, Trajectory


@dataclass(eq=False)
class VisitCounts:
    n_sa: np.ndarray
    n_say: np.ndarray
    episodes_absorbed: int = 0

    @classmethod
    def empty(cls, S: int, A: int) -> "VisitCounts":
        return cls(np.zeros((S, A), dtype=np.int64), np.zeros((S, A, S), dtype=np.int64))

    @classmethod
    def from_history(cls, history: History, S: int, A: int) -> "VisitCounts":
        counts = cls.empty(S, A)
        for traj in history:
            counts.absorb(traj)
        return counts

    @property
    def num_states(self) -> int:
        return self.n_sa.shape[0]

    def absorb(self, traj: Trajectory, next_states: Optional[Sequence[int]] = None) -> "VisitCounts":
        """Add one episode in place and return self.

        ``next_states[h]`` is the state reached after step h; it defaults to
        the trajectory's own record.  The final transition is counted too.
        """
        nxt = traj.next_states if next_states is None else np.asarray(next_states, dtype=np.int64)
        if len(nxt) != len(traj):
            raise ValueError("need one next state per step")
        np.add.at(self.n_sa, (traj.states, traj.actions), 1)
        np.add.at(self.n_say, (traj.states, traj.actions, nxt), 1)
        self.episodes_absorbed += 1
        return self

    def copy(self) -> "VisitCounts":
        return VisitCounts(self.n_sa.copy(), self.n_say.copy(), self.episodes_absorbed)

    def __eq__(self, other):
        if not isinstance(other, VisitCounts):
            return NotImplemented
        return (
            self.episodes_absorbed == other.episodes_absorbed
            and np.array_equal(self.n_sa, other.n_sa)
            and np.array_equal(self.n_say, other.n_say)
        )

    __hash__ = None


def absorb_trajectory(counts: VisitCounts, traj: Trajectory, next_states=None) -> VisitCounts:
    """Functional variant of ``VisitCounts.absorb``: returns updated copy."""
    return counts.copy().absorb(traj, next_states)


def empirical_transition(counts: VisitCounts) -> np.ndarray:
    """``N(x,a,y) / N(x,a)``, or uniform ``1/S`` for pairs never visited."""
    S = counts.num_states
    n = counts.n_sa[..., None]
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = counts.n_say / n
    return np.where(n > 0, ratio, 1.0 / S)
