"""Readers and writers for environment, history and results files."""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .envs import Env
from .mdp import History, RewardFn, TabularMdp, Trajectory, validate_mdp

HISTORY_HEADER = ["episode", "step", "state", "action", "next_state"]
RESULTS_HEADER = ["checkpoint_k", "planning_error", "mixture_size", "optimal_value"]


def env_to_dict(mdp: TabularMdp, rewards: Sequence[RewardFn], layout: Optional[dict] = None, info=None) -> dict:
    S, A, H = mdp.dims
    out = {
        "S": S,
        "A": A,
        "H": H,
        "x1": mdp.initial_state,
        "P": mdp.transition.tolist(),
        "rewards": [{"name": r.name, "r": r.r.tolist()} for r in rewards],
    }
    if layout:
        out["layout"] = layout
    if info:
        out["info"] = info
    return out


def save_env(path, env: Env, extra_rewards: Sequence[RewardFn] = ()) -> Path:
    path = Path(path)
    data = env_to_dict(env.mdp, [env.reward, *extra_rewards], env.layout, env.info)
    # json writes floats with repr, i.e. 17 significant digits: lossless
    path.write_text(json.dumps(data, indent=1))
    return path


def load_env(path, reward_name: Optional[str] = None) -> Env:
    data = json.loads(Path(path).read_text())
    mdp = TabularMdp(np.asarray(data["P"], dtype=np.float64), int(data["H"]), int(data["x1"]))
    if (mdp.num_states, mdp.num_actions) != (data["S"], data["A"]):
        raise ValueError("S/A fields disagree with the transition array")
    validate_mdp(mdp)
    rewards = {r["name"]: RewardFn(np.asarray(r["r"], dtype=np.float64), name=r["name"]) for r in data["rewards"]}
    if not rewards:
        raise ValueError("environment file has no rewards")
    if reward_name is None:
        reward = next(iter(rewards.values()))
    elif reward_name in rewards:
        reward = rewards[reward_name]
    else:
        raise KeyError(f"no reward named {reward_name!r}; have {sorted(rewards)}")
    reward.check_matches(mdp)
    info = dict(data.get("info", {}))
    info["rewards"] = sorted(rewards)
    return Env(mdp, reward, data.get("layout", {}), info)


def save_history(path, history: History) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HISTORY_HEADER)
        for k, traj in enumerate(history, start=1):
            for h in range(len(traj)):
                w.writerow([k, h + 1, traj.states[h], traj.actions[h], traj.next_states[h]])
    return path


def load_history(path) -> History:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != HISTORY_HEADER:
            raise ValueError(f"unexpected history header {header}")
        rows = np.array([[int(v) for v in row] for row in reader], dtype=np.int64).reshape(-1, 5)
    history = History()
    if rows.size == 0:
        return history
    episodes = rows[:, 0]
    if np.any(np.diff(episodes) < 0) or episodes[0] != 1:
        raise ValueError("history rows must be grouped by episode, starting at 1")
    for k in range(1, int(episodes.max()) + 1):
        block = rows[episodes == k]
        if not np.array_equal(block[:, 1], np.arange(1, len(block) + 1)):
            raise ValueError(f"episode {k} steps are not 1..H")
        history.append(Trajectory(block[:, 2], block[:, 3], block[:, 4]))
    lengths = {len(t) for t in history}
    if len(lengths) > 1:
        raise ValueError("trajectories have unequal lengths")
    return history


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def write_rows(path, rows: Iterable[dict], header: Sequence[str]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in header])
    return path


def read_rows(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))
