"""Command-line entry point: ``gaptae <subcommand> ...``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .envs import bandit_as_mdp, hard_instance, random_gridworld
from .explorer import BonusMode, ExplorationConfig, explore
from .formats import RESULTS_HEADER, load_env, load_history, read_rows, save_env, save_history, write_rows
from .harness import fit_slope, load_config, resolve_checkpoints, run_experiment
from .planner import plan


def _gen_env(args) -> int:
    if args.kind == "hard":
        env = hard_instance(args.S, args.A, args.H, args.rho, args.epsilon, routing=args.routing)
    elif args.kind == "gridworld":
        env = random_gridworld(args.H, args.S, args.A, args.rho, args.seed)
    else:
        if not args.means:
            raise SystemExit("--means is required for a bandit")
        env = bandit_as_mdp([float(m) for m in args.means.split(",")])
    save_env(args.out, env)
    print(f"wrote {args.out}: S={env.mdp.num_states} A={env.mdp.num_actions} H={env.mdp.horizon}")
    return 0


def _explore(args) -> int:
    env = load_env(args.env)
    cfg = ExplorationConfig(args.rho, args.episodes, args.delta, BonusMode(args.mode), args.seed, clip=not args.no_clip)
    history, elog = explore(env.mdp, cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_history(out / "history.csv", history)
    write_rows(out / "exploration_values.csv",
               [{"episode": k, "value": v} for k, v in enumerate(elog.values, start=1)], ["episode", "value"])
    print(f"wrote {out / 'history.csv'} ({history.episodes} episodes), iota={elog.iota:.6g}")
    return 0


def _checkpoint_arg(text: str, K: int):
    if text in ("geometric", "all"):
        return resolve_checkpoints(text, K)
    return resolve_checkpoints([int(t) for t in text.split(",")], K)


def _plan(args) -> int:
    env = load_env(args.env, args.reward)
    history = load_history(args.history)
    cps = _checkpoint_arg(args.checkpoints, history.episodes)
    result = plan(history, env.reward, args.delta, cps, exact=not args.approx_mixture, mdp=env.mdp,
                  bonus_mode=args.mode)
    write_rows(args.out, result.rows(), RESULTS_HEADER)
    for row in result.rows():
        print(f"k={row['checkpoint_k']:>8d}  error={row['planning_error']:.6g}")
    return 0


def _bench(args) -> int:
    cfg = load_config(args.config)
    if args.methods:
        cfg["methods"] = args.methods.split(",")
    if args.episodes:
        cfg["episodes"] = args.episodes
    out = run_experiment(cfg, args.out_dir)
    print(f"results in {out}")
    return 0


def _slope(args) -> int:
    rows = read_rows(args.results)
    methods = sorted({r.get("method", "") for r in rows})
    for m in methods:
        if args.method and m != args.method:
            continue
        sel = [r for r in rows if r.get("method", "") == m]
        ks = [float(r["checkpoint_k"]) for r in sel]
        errs = [float(r["planning_error"]) for r in sel]
        window = tuple(args.window) if args.window else None
        try:
            print(f"{m or 'curve'}\t{fit_slope(ks, errs, window):.6f}")
        except ValueError as err:
            print(f"{m or 'curve'}\tn/a ({err})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gaptae",
        description="Gap-dependent task-agnostic exploration: generate environments, explore without reward, "
        "plan for a revealed reward and benchmark error curves.",
    )
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-env", help="generate an environment file")
    g.add_argument("kind", choices=["hard", "gridworld", "bandit"])
    g.add_argument("--S", type=int, default=10)
    g.add_argument("--A", type=int, default=10)
    g.add_argument("--H", type=int, default=5)
    g.add_argument("--rho", type=float, default=0.4)
    g.add_argument("--epsilon", type=float, default=0.05, help="hard instance only")
    g.add_argument("--routing", choices=["uniform", "action"], default="uniform", help="hard instance only")
    g.add_argument("--means", help="bandit arm means, comma separated")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_gen_env)

    e = sub.add_parser("explore", help="run the reward-free exploration phase")
    e.add_argument("--env", required=True)
    e.add_argument("--rho", type=float, required=True)
    e.add_argument("-K", "--episodes", type=int, required=True)
    e.add_argument("--delta", type=float, default=0.1, help="failure probability (default 0.1)")
    e.add_argument("--mode", choices=[m.value for m in BonusMode], default="full")
    e.add_argument("--no-clip", action="store_true", help="disable the clip on the leading bonus term")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out-dir", required=True)
    e.set_defaults(func=_explore)

    pl = sub.add_parser("plan", help="plan for a revealed reward and score it")
    pl.add_argument("--history", required=True)
    pl.add_argument("--env", required=True)
    pl.add_argument("--reward", default=None, help="reward name in the env file (default: first)")
    pl.add_argument("--checkpoints", default="geometric", help="'geometric' (base 2), 'all' or a comma list")
    pl.add_argument("--delta", type=float, default=0.1)
    pl.add_argument("--mode", choices=[m.value for m in BonusMode], default="full", help="planning bonus form")
    pl.add_argument("--approx-mixture", action="store_true",
                    help="mix only checkpoint policies instead of every per-episode policy")
    pl.add_argument("--out", default="results.csv")
    pl.set_defaults(func=_plan)

    b = sub.add_parser("bench", help="run a configured experiment (YAML config or manifest.json)")
    b.add_argument("config")
    b.add_argument("--methods", help="comma list overriding the config: gap,unclipped,simulator,mab")
    b.add_argument("-K", "--episodes", type=int, default=None)
    b.add_argument("--out-dir", required=True)
    b.set_defaults(func=_bench)

    s = sub.add_parser("slope", help="log-log slope of a results CSV")
    s.add_argument("results")
    s.add_argument("--window", type=float, nargs=2, metavar=("K_LO", "K_HI"))
    s.add_argument("--method", default=None)
    s.set_defaults(func=_slope)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
