"""Single-cache environment: two popularity chains, one cache, per-slot costs.

The agent state after slot t-1 is (global profile, local profile, cache
contents). Choosing contents a(t) incurs

    cost = lam1 * a(t)'(1 - a(t-1))      fetch charge for newly cached files
         + lam2 * (1 - a(t))' p_L(t)     local misses
         + lam3 * (1 - a(t))' p_G(t)     global misses

where both profiles are the chain states revealed after the transition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rng as streams
from .actions import validate_action
from .popularity import PopularityChain, empirical_profile, nearest_state, sample_requests, step_chain


def cost_tables(
    p_global: np.ndarray,
    p_local: np.ndarray,
    actions: np.ndarray,
    lambdas: tuple[float, float, float],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-(state, action) cost components for enumerated actions.

    refresh[a_prev, a] = lam1 * a'(1 - a_prev)
    miss_l[j, a]       = lam2 * (1 - a)' p_local[j]
    miss_g[i, a]       = lam3 * (1 - a)' p_global[i]
    """
    lam1, lam2, lam3 = (float(x) for x in lambdas)
    af = actions.astype(np.float64)
    not_cached = 1.0 - af
    refresh = lam1 * (not_cached @ af.T).T
    miss_l = lam2 * (p_local @ not_cached.T)
    miss_g = lam3 * (p_global @ not_cached.T)
    return refresh, miss_l, miss_g


def slot_cost(
    a_prev: np.ndarray,
    a: np.ndarray,
    p_g: np.ndarray,
    p_l: np.ndarray,
    lambdas: tuple[float, float, float],
) -> float:
    """Realized cost of moving from cache a_prev to a under revealed profiles."""
    lam1, lam2, lam3 = lambdas
    af = a.astype(np.float64)
    apf = a_prev.astype(np.float64)
    c1 = lam1 * float(af @ (1.0 - apf))
    c2 = lam2 * float((1.0 - af) @ p_l)
    c3 = lam3 * float((1.0 - af) @ p_g)
    return (c1 + c2) + c3


@dataclass
class SingleNodeEnv:
    """Stepwise environment around the two chains.

    Profiles revealed to the agent are the true post-transition chain
    states by default. With observe="empirical" the local state is instead
    estimated: requests_per_slot draws from the true local profile are
    normalized and mapped to the nearest chain state in total variation.
    A slot with zero requests keeps the previous local observation.
    """

    global_chain: PopularityChain
    local_chain: PopularityChain
    cache_size: int
    lambdas: tuple[float, float, float]
    seed: int = 0
    observe: str = "exact"  # "exact" | "empirical"
    requests_per_slot: int = 100
    g_state: int = field(init=False, default=0)
    l_state: int = field(init=False, default=0)
    l_observed: int = field(init=False, default=0)
    a_prev: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        if self.global_chain.n_files != self.local_chain.n_files:
            raise ValueError("chains must describe the same file set")
        if self.observe not in ("exact", "empirical"):
            raise ValueError("observe must be 'exact' or 'empirical'")
        if self.observe == "empirical" and self.requests_per_slot < 0:
            raise ValueError("requests_per_slot must be >= 0")
        self._rng_env = streams.stream(self.seed, streams.ENV)
        self._rng_init = streams.stream(self.seed, streams.INIT)
        self._rng_req = streams.stream(self.seed, streams.REQUESTS)
        self.reset()

    @property
    def n_files(self) -> int:
        return self.global_chain.n_files

    def reset(self) -> tuple[int, int, np.ndarray]:
        self.g_state = int(self._rng_init.integers(self.global_chain.n_states))
        self.l_state = int(self._rng_init.integers(self.local_chain.n_states))
        self.l_observed = self.l_state
        a = np.zeros(self.n_files, dtype=np.int8)
        a[self._rng_init.choice(self.n_files, size=self.cache_size, replace=False)] = 1
        self.a_prev = a
        return self.g_state, self.l_observed, self.a_prev.copy()

    def step(self, a: np.ndarray) -> tuple[float, int, int]:
        """Apply contents a for the next slot; returns (cost, g_state, l_observed)."""
        validate_action(a, self.n_files, self.cache_size)
        self.g_state = step_chain(self.global_chain, self.g_state, self._rng_env)
        self.l_state = step_chain(self.local_chain, self.l_state, self._rng_env)
        p_l_true = self.local_chain.states[self.l_state]
        if self.observe == "empirical":
            counts = sample_requests(p_l_true, self.requests_per_slot, self._rng_req)
            if counts.sum() > 0:
                self.l_observed = nearest_state(self.local_chain, empirical_profile(counts))
            # zero requests: keep the previous observation
        else:
            self.l_observed = self.l_state
        cost = slot_cost(
            self.a_prev,
            a,
            self.global_chain.states[self.g_state],
            self.local_chain.states[self.l_state],
            self.lambdas,
        )
        self.a_prev = np.asarray(a, dtype=np.int8).copy()
        return cost, self.g_state, self.l_observed
