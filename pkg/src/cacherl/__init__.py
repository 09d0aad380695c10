"""Caching-policy simulator and reinforcement-learning library.

Single cache node: popularity chains drive per-slot costs; learners are
tabular Q-learning, linear-approximation Q-learning, and an exact solver
of the underlying decision process for ground truth. Cache network: a
parent node serving many leaf caches on a slower timescale, learned with
per-group Q-networks against classic eviction baselines.
"""

from . import rng
from .actions import enumerate_actions, top_m_action, top_m_indices
from .config import ConfigError, ExperimentConfig, config_hash, load_config, validate_config
from .dqn import Experience, HyperDQN, ReplayBuffer, epsilon_anneal, even_partition
from .eviction import FIFOCache, LFUCache, LRUCache, baseline_serve, make_cache, noncausal_best
from .harness import (
    RunRecord,
    compare_policies,
    read_csv,
    run_dqn_arm,
    run_experiment,
    write_comparison,
    write_csv,
)
from .linear_q import LinearQParams, StepSizes, run_linear_q
from .mdp import (
    ExplicitMDP,
    ValueTable,
    bellman_residual,
    build_mdp,
    policy_evaluation,
    policy_iteration,
    simulate_policy,
    value_iteration,
)
from .network import (
    LeafPhase,
    SmoothedLeaf,
    aggregate_state,
    baseline_costs,
    leaf_cost,
    nocache_costs,
    noncausal_costs,
    parent_cost,
    simulate_leaves,
    slot_avg_cost,
)
from .nn import FeedforwardNet, masked_l2_loss
from .popularity import (
    PopularityChain,
    empirical_profile,
    random_chain,
    sample_requests,
    step_chain,
    zipf_chain,
    zipf_profile,
)
from .single_node import SingleNodeEnv, cost_tables, slot_cost
from .tabular_q import QTable, run_q_learning
from .trajectories import EpsilonSchedule, LearningSchedule, running_mean

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "EpsilonSchedule",
    "Experience",
    "ExperimentConfig",
    "ExplicitMDP",
    "FIFOCache",
    "FeedforwardNet",
    "HyperDQN",
    "LFUCache",
    "LRUCache",
    "LeafPhase",
    "LearningSchedule",
    "LinearQParams",
    "PopularityChain",
    "QTable",
    "ReplayBuffer",
    "RunRecord",
    "SingleNodeEnv",
    "SmoothedLeaf",
    "StepSizes",
    "ValueTable",
    "aggregate_state",
    "baseline_costs",
    "baseline_serve",
    "bellman_residual",
    "build_mdp",
    "compare_policies",
    "config_hash",
    "cost_tables",
    "empirical_profile",
    "enumerate_actions",
    "epsilon_anneal",
    "even_partition",
    "leaf_cost",
    "load_config",
    "make_cache",
    "masked_l2_loss",
    "nocache_costs",
    "noncausal_best",
    "noncausal_costs",
    "parent_cost",
    "policy_evaluation",
    "policy_iteration",
    "random_chain",
    "read_csv",
    "rng",
    "run_dqn_arm",
    "run_experiment",
    "run_linear_q",
    "run_q_learning",
    "running_mean",
    "sample_requests",
    "simulate_leaves",
    "simulate_policy",
    "slot_avg_cost",
    "slot_cost",
    "step_chain",
    "top_m_action",
    "top_m_indices",
    "validate_config",
    "value_iteration",
    "write_comparison",
    "write_csv",
    "zipf_chain",
    "zipf_profile",
]
