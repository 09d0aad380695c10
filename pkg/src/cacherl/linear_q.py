"""Q-learning with the factored linear value model.

Instead of a table over all C(F, M) actions, the value of leaving file f
uncached is scored by

    psi(s) = ThetaG[global idx] + ThetaL[local idx] + thetaR * a_prev

and Q(s, a') ~= psi(s)' (1 - a'). The greedy action simply caches the M
largest scores, so action selection is a sort, not a search, and the
model holds (|P_G| + |P_L|) * F + 1 scalars total.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels, rng as streams
from .actions import random_action, top_m_action
from .popularity import PopularityChain
from .single_node import SingleNodeEnv
from .trajectories import (
    EpsilonSchedule,
    draw_chain_paths,
    initial_action_vector,
    observed_local_path,
)

State = tuple[int, int, np.ndarray]  # (global idx, local idx, current action)


@dataclass
class LinearQParams:
    theta_g: np.ndarray  # (|P_G|, F)
    theta_l: np.ndarray  # (|P_L|, F)
    theta_r: float = 0.0

    @classmethod
    def zeros(cls, n_global: int, n_local: int, n_files: int) -> "LinearQParams":
        return cls(np.zeros((n_global, n_files)), np.zeros((n_local, n_files)), 0.0)

    @property
    def n_files(self) -> int:
        return self.theta_g.shape[1]

    def count(self) -> int:
        """Number of learnable scalars."""
        return self.theta_g.size + self.theta_l.size + 1


@dataclass(frozen=True)
class StepSizes:
    alpha_g: float
    alpha_l: float
    alpha_r: float

    def __post_init__(self) -> None:
        if min(self.alpha_g, self.alpha_l, self.alpha_r) <= 0:
            raise ValueError("step sizes must be positive")


def psi(state: State, params: LinearQParams) -> np.ndarray:
    """Per-file score of the state: higher means costlier to leave uncached."""
    g, l, a = state
    return params.theta_g[g] + params.theta_l[l] + params.theta_r * a.astype(np.float64)


def approx_q(state: State, a_next: np.ndarray, params: LinearQParams) -> float:
    """psi(state)' (1 - a_next)."""
    return float(psi(state, params) @ (1.0 - a_next.astype(np.float64)))


def greedy_action(state: State, params: LinearQParams, m: int) -> np.ndarray:
    """Minimizer of approx_q over all M-subsets: cache the m largest scores."""
    return top_m_action(psi(state, params), m)


def td_error(
    s_prev: State,
    a_taken: np.ndarray,
    cost: float,
    s_new: State,
    params: LinearQParams,
    gamma: float,
    m: int,
) -> float:
    """cost + gamma * min_a' Q(s_new, a') - Q(s_prev, a_taken), current params."""
    best_next = greedy_action(s_new, params, m)
    return cost + gamma * approx_q(s_new, best_next, params) - approx_q(s_prev, a_taken, params)


def sgd_update(params: LinearQParams, s_prev: State, a_taken: np.ndarray, err: float, steps: StepSizes) -> None:
    """Semi-gradient step on the squared TD error; touches two rows and thetaR."""
    if not np.isfinite(err):
        raise ValueError("TD error must be finite")
    g, l, a_prev = s_prev
    uncached = 1.0 - a_taken.astype(np.float64)
    params.theta_g[g] += steps.alpha_g * err * uncached
    params.theta_l[l] += steps.alpha_l * err * uncached
    params.theta_r += steps.alpha_r * err * float(a_prev.astype(np.float64) @ uncached)


def run_linear_q_env(
    env: SingleNodeEnv,
    steps: StepSizes,
    epsilon: EpsilonSchedule,
    gamma: float,
    num_slots: int,
    rng: np.random.Generator,
) -> tuple[LinearQParams, np.ndarray]:
    """Reference stepwise loop against a live environment object."""
    params = LinearQParams.zeros(env.global_chain.n_states, env.local_chain.n_states, env.n_files)
    eps = epsilon.array(num_slots)
    costs = np.empty(num_slots)
    g, l = env.g_state, env.l_observed
    a_prev = env.a_prev.copy()
    m = env.cache_size
    for t in range(num_slots):
        s_prev: State = (g, l, a_prev)
        if rng.uniform() < eps[t]:
            a = random_action(env.n_files, m, rng)
        else:
            a = greedy_action(s_prev, params, m)
        cost, g, l = env.step(a)
        s_new: State = (g, l, a)
        err = td_error(s_prev, a, cost, s_new, params, gamma, m)
        sgd_update(params, s_prev, a, err, steps)
        costs[t] = cost
        a_prev = a
    return params, costs


def run_linear_q(
    global_chain: PopularityChain,
    local_chain: PopularityChain,
    cache_size: int,
    lambdas: tuple[float, float, float],
    gamma: float,
    steps: StepSizes,
    epsilon: EpsilonSchedule,
    num_slots: int,
    seed: int,
    observe: str = "exact",
    requests_per_slot: int = 100,
    params: LinearQParams | None = None,
) -> tuple[LinearQParams, np.ndarray]:
    """Seeded kernel runner: same trajectory law as tabular and the oracle."""
    n_files = global_chain.n_files
    if params is None:
        params = LinearQParams.zeros(global_chain.n_states, local_chain.n_states, n_files)
    g0, l0, gpath, lpath = draw_chain_paths(global_chain, local_chain, seed, num_slots)
    if observe == "empirical":
        lpath_obs = observed_local_path(local_chain, lpath, seed, requests_per_slot)
    else:
        lpath_obs = lpath
    a0 = initial_action_vector(seed, n_files, cache_size)
    agent = streams.stream(seed, streams.AGENT)
    u_explore = agent.uniform(0.0, 1.0, size=num_slots)
    u_rand = agent.uniform(0.0, 1.0, size=(num_slots, cache_size))
    lam1, lam2, lam3 = (float(x) for x in lambdas)
    theta_r = np.array([params.theta_r])
    costs = np.empty(num_slots)
    _kernels.linear_q_run(
        global_chain.states,
        local_chain.states,
        cache_size,
        lam1,
        lam2,
        lam3,
        float(gamma),
        steps.alpha_g,
        steps.alpha_l,
        steps.alpha_r,
        epsilon.array(num_slots),
        gpath,
        lpath,
        lpath_obs,
        g0,
        l0,
        a0,
        u_explore,
        u_rand,
        params.theta_g,
        params.theta_l,
        theta_r,
        costs,
    )
    params.theta_r = float(theta_r[0])
    return params, costs
