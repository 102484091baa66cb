"""Experiment orchestration: configs, end-to-end runs, error curves."""
from __future__ import annotations

import copy
import json
import logging
import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import yaml

from . import __version__
from .baselines import (
    BernoulliBandit,
    mab_uniform_explore,
    simulator_sample_bound,
    simulator_uniform,
)
from .dp import gaps, optimal_values, policy_value
from .envs import Env, bandit_as_mdp, hard_instance, random_gridworld
from .explorer import BonusMode, ExplorationConfig, explore, log_factor
from .formats import RESULTS_HEADER, load_env, save_env, save_history, write_rows
from .mdp import episode_rng
from .planner import geometric_checkpoints, plan

log = logging.getLogger(__name__)

METHODS = ("gap", "unclipped", "simulator", "mab")
BENCH_HEADER = ["method", *RESULTS_HEADER]

DEFAULTS = {
    "env": {"kind": "gridworld", "H": 5, "S": 10, "A": 10, "rho": 0.4, "seed": 0},
    "rho": None,  # falls back to env.rho (and env.rho to this)
    "preset": None,
    "epsilon": None,
    "episodes": 1000,
    "delta": 0.1,
    "bonus_mode": "full",
    "seed": 0,
    "methods": ["gap"],
    "checkpoints": "geometric",
    "mixture": "exact",
    "reward": None,
    "anchor": None,
    "plot": True,
}


class ConfigError(ValueError):
    pass


def load_config(path) -> dict:
    """Read a YAML config (or a run manifest, whose ``config`` key is used)."""
    data = yaml.safe_load(Path(path).read_text()) or {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    if "config" in data and "manifest_version" in data:
        data = data["config"]
    return resolve_config(data)


def resolve_config(raw: dict) -> dict:
    unknown = set(raw) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = copy.deepcopy(DEFAULTS)
    env = dict(raw.get("env") or cfg["env"])
    cfg.update({k: v for k, v in raw.items() if k != "env"})
    cfg["env"] = env
    if env.get("kind") not in ("hard", "gridworld", "bandit", "file"):
        raise ConfigError(f"env.kind must be hard, gridworld, bandit or file, got {env.get('kind')!r}")
    methods = cfg["methods"]
    if isinstance(methods, str):
        methods = [m.strip() for m in methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise ConfigError(f"methods must be a non-empty subset of {METHODS}, got {methods}")
    cfg["methods"] = list(methods)
    if cfg["preset"] == "agnostic":
        if not cfg.get("epsilon"):
            raise ConfigError("preset 'agnostic' needs a target epsilon")
        horizon = env.get("H")
        if horizon is None:
            raise ConfigError("preset 'agnostic' needs env.H")
        cfg["rho"] = float(cfg["epsilon"]) / float(horizon)
    elif cfg["preset"] is not None:
        raise ConfigError(f"unknown preset {cfg['preset']!r}")
    if cfg["rho"] is None:
        cfg["rho"] = env.get("rho")
    if cfg["rho"] is None or not float(cfg["rho"]) > 0:
        raise ConfigError("need a positive gap parameter rho")
    cfg["rho"] = float(cfg["rho"])
    if env["kind"] in ("hard", "gridworld"):
        env.setdefault("rho", cfg["rho"])
    if env["kind"] == "hard":
        env.setdefault("epsilon", cfg["epsilon"])
    if not 0 < float(cfg["delta"]) < 1:
        raise ConfigError("delta must lie in (0, 1)")
    if int(cfg["episodes"]) < 1:
        raise ConfigError("episodes must be >= 1")
    cfg["episodes"] = int(cfg["episodes"])
    try:
        BonusMode(cfg["bonus_mode"])
    except ValueError as err:
        raise ConfigError(str(err)) from None
    if cfg["mixture"] not in ("exact", "checkpoints"):
        raise ConfigError("mixture must be 'exact' or 'checkpoints'")
    return cfg


def build_env(env_cfg: dict, reward_name: Optional[str] = None) -> Env:
    kind = env_cfg["kind"]
    if kind == "hard":
        return hard_instance(
            int(env_cfg["S"]), int(env_cfg["A"]), int(env_cfg["H"]), float(env_cfg["rho"]),
            float(env_cfg["epsilon"]), routing=env_cfg.get("routing", "uniform"),
        )
    if kind == "gridworld":
        return random_gridworld(
            int(env_cfg["H"]), int(env_cfg["S"]), int(env_cfg["A"]), float(env_cfg["rho"]), int(env_cfg.get("seed", 0))
        )
    if kind == "bandit":
        return bandit_as_mdp(env_cfg["means"])
    return load_env(env_cfg["path"], reward_name)


def resolve_checkpoints(schedule, K: int) -> list[int]:
    if schedule in (None, "geometric"):
        return geometric_checkpoints(K)
    if schedule == "all":
        return list(range(1, K + 1))
    if isinstance(schedule, dict):
        lo, n = int(schedule.get("from", 1)), int(schedule.get("points", 10))
        ks = np.unique(np.round(np.geomspace(lo, K, n)).astype(int))
        return sorted(set(ks.tolist()) | set(geometric_checkpoints(K)))
    ks = sorted({int(k) for k in schedule})
    if not ks or ks[0] < 1 or ks[-1] > K:
        raise ConfigError(f"checkpoints must lie in [1, {K}]")
    return ks


def minimax_reference(ks: Sequence[float], errors: Sequence[float], anchor: Optional[float] = None) -> np.ndarray:
    """``c / sqrt(k)`` through the error at the anchor checkpoint (default: the first)."""
    ks = np.asarray(ks, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    if ks.size == 0:
        raise ValueError("empty error curve")
    if anchor is None:
        i = 0
    else:
        hits = np.flatnonzero(ks == anchor)
        if hits.size == 0:
            raise ValueError(f"anchor {anchor} is not a checkpoint")
        i = int(hits[0])
    c = errors[i] * math.sqrt(ks[i])
    return c / np.sqrt(ks)


def fit_slope(ks: Sequence[float], errors: Sequence[float], window: Optional[tuple[float, float]] = None) -> float:
    """Least-squares slope of log(error) against log(k) inside ``window``."""
    ks = np.asarray(ks, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    keep = np.ones(ks.shape, dtype=bool) if window is None else (ks >= window[0]) & (ks <= window[1])
    ks, errors = ks[keep], errors[keep]
    if ks.size < 3:
        raise ValueError(f"need at least 3 points to fit a slope, got {ks.size}")
    if np.any(errors <= 0):
        raise ValueError("errors must be positive on a log scale")
    slope, _ = np.polyfit(np.log(ks), np.log(errors), 1)
    return float(slope)


def _clean_error(e: float, cap: float) -> float:
    if e < -1e-9:
        raise AssertionError(f"planning error {e} is negative: mixture beats the optimum")
    return min(max(e, 0.0), cap)


def run_method(method: str, env: Env, cfg: dict, checkpoints: list[int], out_dir: Optional[Path] = None) -> list[dict]:
    mdp, reward = env
    S, A, H = mdp.dims
    K = cfg["episodes"]
    v_star = optimal_values(mdp, reward).initial_value(mdp.initial_state)
    rows = []
    if method in ("gap", "unclipped"):
        ecfg = ExplorationConfig(
            rho=cfg["rho"], episodes=K, delta=cfg["delta"], bonus_mode=cfg["bonus_mode"],
            seed=cfg["seed"], clip=method == "gap",
        )
        history, _ = explore(mdp, ecfg)
        if out_dir is not None:
            save_history(out_dir / f"history_{method}.csv", history)
        result = plan(history, reward, cfg["delta"], checkpoints, exact=cfg["mixture"] == "exact", mdp=mdp,
                      bonus_mode=cfg["bonus_mode"])
        for row in result.rows():
            row["planning_error"] = _clean_error(row["planning_error"], H)
            rows.append({"method": method, **row})
    elif method == "simulator":
        for k in checkpoints:
            n = max(1, (k * H) // (S * A))  # same transition budget as k episodes
            pi = simulator_uniform(mdp, reward, n, episode_rng(cfg["seed"], k, run=2))
            e = v_star - policy_value(mdp, reward, pi).initial_value(mdp.initial_state)
            rows.append({"method": method, "checkpoint_k": k, "planning_error": _clean_error(e, H),
                         "mixture_size": 1, "optimal_value": v_star})
    elif method == "mab":
        if (S, H) != (1, 1):
            raise ConfigError("mab baseline needs a bandit environment (S = H = 1)")
        bandit = BernoulliBandit(tuple(reward.r[0, 0]))
        means = np.asarray(bandit.means)
        for k in checkpoints:
            if k < A:
                continue
            arm = mab_uniform_explore(bandit, k, episode_rng(cfg["seed"], k, run=3))
            rows.append({"method": method, "checkpoint_k": k, "planning_error": float(means.max() - means[arm]),
                         "mixture_size": 1, "optimal_value": v_star})
    else:
        raise ConfigError(f"unknown method {method!r}")
    return rows


def run_experiment(config, out_dir) -> Path:
    """Run every configured method and write env, histories, results, manifest and plot."""
    cfg = resolve_config(config) if isinstance(config, dict) else load_config(config)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    env = build_env(cfg["env"], cfg["reward"])
    mdp, reward = env
    S, A, H = mdp.dims
    K = cfg["episodes"]
    report = gaps(mdp, reward, rho_claim=cfg["rho"])
    if not report.rho_ok:
        log.warning("rho=%g exceeds the instance gap %g; the fast rate is not guaranteed", cfg["rho"], report.gap_min)
    checkpoints = resolve_checkpoints(cfg["checkpoints"], K)
    save_env(out_dir / "env.json", env)

    rows = []
    for method in cfg["methods"]:
        log.info("running %s for K=%d", method, K)
        rows.extend(run_method(method, env, cfg, checkpoints, out_dir))
    write_rows(out_dir / "results.csv", rows, BENCH_HEADER)

    manifest = {
        "manifest_version": 1,
        "package_version": __version__,
        "config": cfg,
        "derived": {
            "S": S, "A": A, "H": H,
            "iota": log_factor(S, A, H, K, cfg["delta"]),
            "gap_min": report.gap_min if math.isfinite(report.gap_min) else None,
            "rho_satisfies_gap_condition": bool(report.rho_ok),
            "checkpoints": checkpoints,
            "env_info": env.info,
            "simulator_sample_bound": simulator_sample_bound(S, A, H, cfg["rho"], cfg["delta"]),
        },
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))

    if cfg["plot"]:
        from .plotting import plot_error_curves

        curves = {}
        for method in cfg["methods"]:
            sel = [r for r in rows if r["method"] == method]
            if sel:
                curves[method] = ([r["checkpoint_k"] for r in sel], [r["planning_error"] for r in sel])
        ref = None
        lead = curves.get("gap") or next(iter(curves.values()), None)
        if lead is not None and lead[1][0] > 0:
            anchor = cfg["anchor"] if cfg["anchor"] in lead[0] else None
            ref = (lead[0], minimax_reference(lead[0], lead[1], anchor).tolist())
            write_rows(out_dir / "reference.csv",
                       [{"checkpoint_k": k, "reference": v} for k, v in zip(*ref)], ["checkpoint_k", "reference"])
        plot_error_curves(curves, out_dir / "error_curve.svg", reference=ref)
    return out_dir
