"""Shared run plumbing: chain paths, initial conditions, schedules.

Every single-node runner (tabular, linear, oracle rollout) calls these
with the same seed, so all of them see the identical chain trajectory and
identical initial cache. Agents then differ only in what they do with it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, rng as streams
from .popularity import PopularityChain, empirical_profile, nearest_state


def draw_chain_paths(
    global_chain: PopularityChain,
    local_chain: PopularityChain,
    seed: int,
    num_slots: int,
) -> tuple[int, int, np.ndarray, np.ndarray]:
    """(g0, l0, gpath, lpath): initial states and per-slot visited states."""
    init = streams.stream(seed, streams.INIT)
    g0 = int(init.integers(global_chain.n_states))
    l0 = int(init.integers(local_chain.n_states))
    u_g = streams.stream(seed, streams.CHAIN_GLOBAL).uniform(0.0, 1.0, size=num_slots)
    u_l = streams.stream(seed, streams.CHAIN_LOCAL).uniform(0.0, 1.0, size=num_slots)
    gpath = np.empty(num_slots, dtype=np.int64)
    lpath = np.empty(num_slots, dtype=np.int64)
    _kernels.chain_path(global_chain.cumulative_rows(), g0, u_g, gpath)
    _kernels.chain_path(local_chain.cumulative_rows(), l0, u_l, lpath)
    return g0, l0, gpath, lpath


def initial_action_index(seed: int, n_actions: int) -> int:
    """Initial cache as a uniform index into the enumerated action set."""
    return int(streams.stream(seed, streams.INIT_ACTION).integers(n_actions))


def initial_action_vector(seed: int, n_files: int, cache_size: int) -> np.ndarray:
    """Initial cache as a binary vector.

    Matches initial_action_index on enumerable instances (same seed picks
    the same cache), so agents that never enumerate actions still start
    from the cache an enumerating agent would.
    """
    from .actions import ENUMERATE_MAX_FILES, unrank_combination

    if n_files <= ENUMERATE_MAX_FILES:
        idx = initial_action_index(seed, math.comb(n_files, cache_size))
        members = unrank_combination(n_files, cache_size, idx)
    else:
        gen = streams.stream(seed, streams.INIT_ACTION)
        members = gen.choice(n_files, size=cache_size, replace=False)
    a = np.zeros(n_files, dtype=np.int8)
    a[np.asarray(members)] = 1
    return a


def observed_local_path(
    local_chain: PopularityChain,
    lpath: np.ndarray,
    seed: int,
    requests_per_slot: int,
) -> np.ndarray:
    """Local path as seen through per-slot request samples.

    Each slot's requests are drawn from the true profile; the empirical
    profile maps to the nearest chain state in total variation. A slot
    with zero requests carries the previous observation forward.
    """
    req = streams.stream(seed, streams.REQUESTS)
    cdf = np.cumsum(local_chain.states, axis=1)
    n_files = local_chain.n_files
    out = np.empty(len(lpath), dtype=np.int64)
    prev = int(lpath[0]) if len(lpath) else 0
    for t, l_true in enumerate(lpath):
        u = req.uniform(0.0, 1.0, size=requests_per_slot)
        if requests_per_slot == 0:
            out[t] = prev
            continue
        idx = np.searchsorted(cdf[l_true], u, side="right").clip(0, n_files - 1)
        counts = np.bincount(idx, minlength=n_files)
        out[t] = nearest_state(local_chain, empirical_profile(counts))
        prev = int(out[t])
    return out


@dataclass(frozen=True)
class EpsilonSchedule:
    """Exploration schedule.

    constant: eps_t = value.
    inverse_time: eps_t = value while t <= burn_in (1-based), then 1/t,
    never below floor.
    """

    mode: str = "constant"
    value: float = 0.05
    burn_in: int = 0
    floor: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in ("constant", "inverse_time"):
            raise ValueError("epsilon mode must be 'constant' or 'inverse_time'")
        if not 0.0 <= self.value <= 1.0:
            raise ValueError("epsilon value must lie in [0, 1]")

    def array(self, num_slots: int) -> np.ndarray:
        if self.mode == "constant":
            return np.full(num_slots, self.value)
        t = np.arange(1, num_slots + 1, dtype=np.float64)
        eps = np.maximum(self.floor, 1.0 / t)
        eps[: self.burn_in] = self.value
        return eps


@dataclass(frozen=True)
class LearningSchedule:
    """Step size and exploration for the tabular learner.

    beta is a constant in (0, 1]; beta="visits" uses 1/visit-count.
    """

    beta: "float | str" = 0.8
    epsilon: EpsilonSchedule = EpsilonSchedule()

    def __post_init__(self) -> None:
        if isinstance(self.beta, str):
            if self.beta != "visits":
                raise ValueError("beta must be a number or 'visits'")
        elif not 0.0 < float(self.beta) <= 1.0:
            raise ValueError("beta must lie in (0, 1]")

    @property
    def beta_is_visits(self) -> bool:
        return isinstance(self.beta, str)


def running_mean(values: np.ndarray) -> np.ndarray:
    """Cumulative mean: out[t] = mean(values[: t + 1])."""
    values = np.asarray(values, dtype=np.float64)
    return np.cumsum(values) / np.arange(1, len(values) + 1)
