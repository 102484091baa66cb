"""Gap-dependent task-agnostic exploration for tabular finite-horizon MDPs."""

__version__ = "0.1.0"

from .counts import VisitCounts, absorb_trajectory, empirical_transition
from .dp import (
    GapReport,
    ValueTables,
    brute_force_optimal,
    clip,
    gaps,
    greedy_policy,
    mixture_value,
    optimal_values,
    policy_value,
)
from .envs import Env, bandit_as_mdp, hard_instance, random_gridworld, random_mdp
from .explorer import BonusMode, ExplorationConfig, ExplorationLog, exploration_bonus, explore, ucbq
from .mdp import (
    DeterministicPolicy,
    History,
    MixturePolicy,
    RewardFn,
    TabularMdp,
    Trajectory,
    rollout,
    sample_next,
    validate_mdp,
)
from .planner import PlanningResult, plan, planning_bonus

__all__ = [
    "BonusMode", "DeterministicPolicy", "Env", "ExplorationConfig", "ExplorationLog", "GapReport",
    "History", "MixturePolicy", "PlanningResult", "RewardFn", "TabularMdp", "Trajectory", "ValueTables",
    "VisitCounts", "absorb_trajectory", "bandit_as_mdp", "brute_force_optimal", "clip", "empirical_transition",
    "exploration_bonus", "explore", "gaps", "greedy_policy", "hard_instance", "mixture_value",
    "optimal_values", "plan", "planning_bonus", "policy_value", "random_gridworld", "random_mdp",
    "rollout", "sample_next", "ucbq", "validate_mdp",
]
