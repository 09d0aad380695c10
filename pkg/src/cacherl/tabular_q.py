"""Exact Q-learning over the enumerated state-action table.

The learner sees the state (global idx, local idx, previous action idx),
picks the next cache contents epsilon-greedily, observes the revealed
profiles, and nudges one table entry:

    Q(s_prev, a) <- (1 - beta) Q(s_prev, a) + beta [cost + gamma min_a' Q(s_new, a')]
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels, rng as streams
from .actions import enumerate_actions
from .popularity import PopularityChain
from .single_node import SingleNodeEnv, cost_tables
from .trajectories import (
    LearningSchedule,
    draw_chain_paths,
    initial_action_index,
    observed_local_path,
)


@dataclass
class QTable:
    """Dense estimates over ((global, local, prev action), next action)."""

    n_global: int
    n_local: int
    actions: np.ndarray  # (A, F) int8
    table: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        n_a = self.actions.shape[0]
        n_states = self.n_global * self.n_local * n_a
        if self.table is None:
            self.table = np.zeros((n_states, n_a))
        elif self.table.shape != (n_states, n_a):
            raise ValueError("table shape does not match the state space")

    @property
    def n_actions(self) -> int:
        return self.actions.shape[0]

    def state_index(self, g: int, l: int, a_prev_idx: int) -> int:
        return (g * self.n_local + l) * self.n_actions + a_prev_idx

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_global": self.n_global,
                "n_local": self.n_local,
                "actions": self.actions.tolist(),
                "table": self.table.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "QTable":
        d = json.loads(text)
        return cls(
            d["n_global"],
            d["n_local"],
            np.array(d["actions"], dtype=np.int8),
            np.array(d["table"], dtype=np.float64),
        )


def select_action(qtable: QTable, state: tuple[int, int, int], epsilon: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy action index; greedy ties break to the lowest index."""
    if rng.uniform() < epsilon:
        return int(rng.integers(qtable.n_actions))
    row = qtable.table[qtable.state_index(*state)]
    return int(np.argmin(row))


def q_update(
    qtable: QTable,
    s_prev: tuple[int, int, int],
    a_idx: int,
    cost: float,
    s_new: tuple[int, int, int],
    beta: float,
    gamma: float,
) -> None:
    """One-entry update toward cost + gamma * min over the successor row."""
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    sp = qtable.state_index(*s_prev)
    sn = qtable.state_index(*s_new)
    target = cost + gamma * float(qtable.table[sn].min())
    qtable.table[sp, a_idx] = (1.0 - beta) * qtable.table[sp, a_idx] + beta * target


def run_q_learning_env(
    env: SingleNodeEnv,
    schedule: LearningSchedule,
    gamma: float,
    num_slots: int,
    rng: np.random.Generator,
) -> tuple[QTable, np.ndarray]:
    """Reference stepwise loop against a live environment object.

    Slow path; the seeds-and-kernels runner below is the one experiments
    use. Kept as the executable statement of the algorithm.
    """
    actions = enumerate_actions(env.n_files, env.cache_size)
    from .actions import action_lookup

    lookup = action_lookup(actions)
    qt = QTable(env.global_chain.n_states, env.local_chain.n_states, actions)
    eps = schedule.epsilon.array(num_slots)
    visits = np.zeros_like(qt.table, dtype=np.int64)
    costs = np.empty(num_slots)
    g, l = env.g_state, env.l_observed
    a_prev_idx = lookup[env.a_prev.tobytes()]
    for t in range(num_slots):
        s_prev = (g, l, a_prev_idx)
        a_idx = select_action(qt, s_prev, eps[t], rng)
        cost, g, l = env.step(actions[a_idx])
        s_new = (g, l, a_idx)
        if schedule.beta_is_visits:
            sp = qt.state_index(*s_prev)
            visits[sp, a_idx] += 1
            beta = 1.0 / visits[sp, a_idx]
        else:
            beta = float(schedule.beta)
        q_update(qt, s_prev, a_idx, cost, s_new, beta, gamma)
        costs[t] = cost
        a_prev_idx = a_idx
    return qt, costs


def run_q_learning(
    global_chain: PopularityChain,
    local_chain: PopularityChain,
    cache_size: int,
    lambdas: tuple[float, float, float],
    gamma: float,
    schedule: LearningSchedule,
    num_slots: int,
    seed: int,
    observe: str = "exact",
    requests_per_slot: int = 100,
    qtable: QTable | None = None,
) -> tuple[QTable, np.ndarray]:
    """Seeded kernel runner: same trajectory law as the oracle rollout."""
    actions = enumerate_actions(global_chain.n_files, cache_size)
    if qtable is None:
        qtable = QTable(global_chain.n_states, local_chain.n_states, actions)
    refresh, miss_l, miss_g = cost_tables(global_chain.states, local_chain.states, actions, lambdas)
    g0, l0, gpath, lpath = draw_chain_paths(global_chain, local_chain, seed, num_slots)
    if observe == "empirical":
        lpath_obs = observed_local_path(local_chain, lpath, seed, requests_per_slot)
    else:
        lpath_obs = lpath
    a0_idx = initial_action_index(seed, actions.shape[0])
    agent = streams.stream(seed, streams.AGENT)
    u_explore = agent.uniform(0.0, 1.0, size=num_slots)
    u_pick = agent.uniform(0.0, 1.0, size=num_slots)
    eps = schedule.epsilon.array(num_slots)
    beta_visit = 1 if schedule.beta_is_visits else 0
    beta = 0.0 if beta_visit else float(schedule.beta)
    visits = np.zeros(qtable.table.shape, dtype=np.int64)
    costs = np.empty(num_slots)
    _kernels.tabular_q_run(
        local_chain.n_states,
        actions.shape[0],
        refresh,
        miss_l,
        miss_g,
        float(gamma),
        beta,
        beta_visit,
        eps,
        gpath,
        lpath,
        lpath_obs,
        g0,
        l0,
        a0_idx,
        u_explore,
        u_pick,
        qtable.table,
        visits,
        costs,
    )
    return qtable, costs
