"""Exact MDP over (global state, local state, cache contents), solved exactly.

With both chains known, the caching problem is a finite MDP: the chain
part of the state moves independently of the action, and the action
chosen becomes the cache component of the successor state. Expected
one-step cost uses the expected next profiles, so

    cbar((i,j,a), a') = lam1 a''(1-a) + lam2 (1-a')' (T_L[j] P_L)
                      + lam3 (1-a')' (T_G[i] P_G).

State index: (i * n_local + j) * n_actions + a_idx.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .actions import enumerate_actions
from .popularity import PopularityChain
from .single_node import cost_tables

MAX_STATE_ACTION_PAIRS = 1_000_000
DENSE_SOLVE_MAX_STATES = 2000


@dataclass
class ExplicitMDP:
    """Tabulated MDP. Transitions stay in factored form (T_G, T_L, action

    determinism); transition_tensor() materializes the dense P^a on demand
    for small instances.
    """

    t_global: np.ndarray  # (nG, nG)
    t_local: np.ndarray  # (nL, nL)
    actions: np.ndarray  # (A, F) int8
    costs: np.ndarray  # (S, A) expected one-step cost
    gamma: float

    @property
    def n_global(self) -> int:
        return self.t_global.shape[0]

    @property
    def n_local(self) -> int:
        return self.t_local.shape[0]

    @property
    def n_actions(self) -> int:
        return self.actions.shape[0]

    @property
    def n_states(self) -> int:
        return self.n_global * self.n_local * self.n_actions

    def state_index(self, i: int, j: int, a_idx: int) -> int:
        return (i * self.n_local + j) * self.n_actions + a_idx

    def state_tuple(self, s: int) -> tuple[int, int, int]:
        a_idx = s % self.n_actions
        ij = s // self.n_actions
        return ij // self.n_local, ij % self.n_local, a_idx

    def chain_kron(self) -> np.ndarray:
        """Joint chain transition over (i,j) pairs: kron(T_G, T_L)."""
        return np.kron(self.t_global, self.t_local)

    def expected_values(self, v: np.ndarray) -> np.ndarray:
        """EV[(i,j), a'] = E_{i',j'}[ v((i',j',a')) ]."""
        vmat = v.reshape(self.n_global * self.n_local, self.n_actions)
        return self.chain_kron() @ vmat

    def q_from_values(self, v: np.ndarray) -> np.ndarray:
        """Q(s, a') = cbar(s, a') + gamma * EV[(i,j), a']."""
        ev = self.expected_values(v)
        return self.costs + self.gamma * np.repeat(ev, self.n_actions, axis=0)

    def transition_tensor(self) -> np.ndarray:
        """Dense P[a', s, s']; guarded, for verification on small instances."""
        s_count = self.n_states
        if s_count * s_count * self.n_actions > 50_000_000:
            raise ValueError("transition tensor too large to materialize")
        kron = self.chain_kron()
        p = np.zeros((self.n_actions, s_count, s_count))
        n_pairs = self.n_global * self.n_local
        for a_next in range(self.n_actions):
            for ij in range(n_pairs):
                for ij2 in range(n_pairs):
                    prob = kron[ij, ij2]
                    dst = ij2 * self.n_actions + a_next
                    base = ij * self.n_actions
                    for a_old in range(self.n_actions):
                        p[a_next, base + a_old, dst] = prob
        return p


@dataclass
class ValueTable:
    values: np.ndarray  # (S,)
    policy: np.ndarray  # (S,) action index per state

    def to_json(self) -> str:
        return json.dumps({"values": self.values.tolist(), "policy": self.policy.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "ValueTable":
        d = json.loads(text)
        return cls(np.array(d["values"], dtype=np.float64), np.array(d["policy"], dtype=np.int64))


def build_mdp(
    global_chain: PopularityChain,
    local_chain: PopularityChain,
    cache_size: int,
    lambdas: tuple[float, float, float],
    gamma: float,
) -> ExplicitMDP:
    """Tabulate costs for every (state, action) pair; guard the table size."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    actions = enumerate_actions(global_chain.n_files, cache_size)
    n_a = actions.shape[0]
    n_states = global_chain.n_states * local_chain.n_states * n_a
    if n_states * n_a > MAX_STATE_ACTION_PAIRS:
        raise ValueError(
            f"state-action table has {n_states * n_a} pairs, over the {MAX_STATE_ACTION_PAIRS} guard"
        )
    exp_global = global_chain.transition @ global_chain.states
    exp_local = local_chain.transition @ local_chain.states
    refresh, miss_l, miss_g = cost_tables(exp_global, exp_local, actions, lambdas)
    n_g, n_l = global_chain.n_states, local_chain.n_states
    costs = np.empty((n_states, n_a))
    for i in range(n_g):
        for j in range(n_l):
            base = (i * n_l + j) * n_a
            # fixed summation order: refresh, then local, then global
            block = (refresh + miss_l[j][None, :]) + miss_g[i][None, :]
            costs[base : base + n_a, :] = block
    return ExplicitMDP(
        np.asarray(global_chain.transition, dtype=np.float64),
        np.asarray(local_chain.transition, dtype=np.float64),
        actions,
        costs,
        float(gamma),
    )


def _policy_transition(mdp: ExplicitMDP, policy: np.ndarray) -> np.ndarray:
    """Dense S x S transition matrix of the chain under a fixed policy."""
    s_count = mdp.n_states
    kron = mdp.chain_kron()
    n_pairs = kron.shape[0]
    p = np.zeros((s_count, s_count))
    for s in range(s_count):
        ij = s // mdp.n_actions
        a_next = policy[s]
        cols = np.arange(n_pairs) * mdp.n_actions + a_next
        p[s, cols] = kron[ij]
    return p


def policy_cost_vector(mdp: ExplicitMDP, policy: np.ndarray) -> np.ndarray:
    return mdp.costs[np.arange(mdp.n_states), policy]


def policy_evaluation(mdp: ExplicitMDP, policy: np.ndarray) -> ValueTable:
    """Solve the linear Bellman system for a fixed policy.

    Dense solve up to DENSE_SOLVE_MAX_STATES states, fixed-point sweeps
    beyond that.
    """
    policy = np.asarray(policy, dtype=np.int64)
    if policy.shape != (mdp.n_states,) or policy.min() < 0 or policy.max() >= mdp.n_actions:
        raise ValueError("policy must map every state to a valid action index")
    c_pi = policy_cost_vector(mdp, policy)
    if mdp.n_states <= DENSE_SOLVE_MAX_STATES:
        p_pi = _policy_transition(mdp, policy)
        v = np.linalg.solve(np.eye(mdp.n_states) - mdp.gamma * p_pi, c_pi)
    else:
        v = np.zeros(mdp.n_states)
        for _ in range(200_000):
            ev = mdp.expected_values(v)
            rows = np.arange(mdp.n_states) // mdp.n_actions
            v_new = c_pi + mdp.gamma * ev[rows, policy]
            if np.max(np.abs(v_new - v)) <= 1e-13 * max(1.0, np.max(np.abs(v_new))):
                v = v_new
                break
            v = v_new
    return ValueTable(v, policy.copy())


def policy_iteration(mdp: ExplicitMDP, max_sweeps: int = 10_000) -> ValueTable:
    """Exact optimal values and policy; ties break to the lowest action index."""
    policy = np.zeros(mdp.n_states, dtype=np.int64)
    for _ in range(max_sweeps):
        table = policy_evaluation(mdp, policy)
        q = mdp.q_from_values(table.values)
        improved = np.argmin(q, axis=1)
        if np.array_equal(improved, policy):
            return ValueTable(table.values, policy)
        policy = improved
    raise RuntimeError("policy iteration did not converge")


def value_iteration(mdp: ExplicitMDP, tol: float = 1e-10, max_iters: int = 1_000_000) -> ValueTable:
    """Independent fixed-point cross-check for policy_iteration."""
    v = np.zeros(mdp.n_states)
    for _ in range(max_iters):
        q = mdp.q_from_values(v)
        v_new = q.min(axis=1)
        if np.max(np.abs(v_new - v)) <= tol:
            return ValueTable(v_new, np.argmin(mdp.q_from_values(v_new), axis=1))
        v = v_new
    raise RuntimeError("value iteration did not converge")


def bellman_residual(mdp: ExplicitMDP, v: np.ndarray, policy: np.ndarray | None = None) -> float:
    """Sup-norm gap between v and one Bellman application.

    With a policy: the fixed-policy backup. Without: the optimality backup.
    """
    q = mdp.q_from_values(v)
    if policy is None:
        backed = q.min(axis=1)
    else:
        backed = q[np.arange(mdp.n_states), policy]
    return float(np.max(np.abs(backed - v)))


def simulate_policy(
    global_chain: PopularityChain,
    local_chain: PopularityChain,
    cache_size: int,
    lambdas: tuple[float, float, float],
    policy: np.ndarray,
    num_slots: int,
    seed: int,
    observe: str = "exact",
    requests_per_slot: int = 100,
) -> np.ndarray:
    """Realized per-slot costs of a fixed policy on the seed's trajectory.

    Uses the same chain paths and initial cache as the learners on that
    seed, so cost traces are directly comparable.
    """
    from . import _kernels
    from .actions import enumerate_actions
    from .single_node import cost_tables
    from .trajectories import draw_chain_paths, initial_action_index, observed_local_path

    actions = enumerate_actions(global_chain.n_files, cache_size)
    refresh, miss_l, miss_g = cost_tables(global_chain.states, local_chain.states, actions, lambdas)
    g0, l0, gpath, lpath = draw_chain_paths(global_chain, local_chain, seed, num_slots)
    if observe == "empirical":
        lpath_obs = observed_local_path(local_chain, lpath, seed, requests_per_slot)
    else:
        lpath_obs = lpath
    a0_idx = initial_action_index(seed, actions.shape[0])
    costs = np.empty(num_slots)
    _kernels.policy_rollout(
        local_chain.n_states,
        actions.shape[0],
        np.asarray(policy, dtype=np.int64),
        refresh,
        miss_l,
        miss_g,
        gpath,
        lpath,
        lpath_obs,
        g0,
        l0,
        a0_idx,
        costs,
    )
    return costs
