"""Two-tier cache network: N leaf caches under one parent cache.

Time splits into slow intervals of T fast slots. Leaves serve requests
every slot with their own local policies; the parent only re-decides its
contents once per interval. A request for file f at leaf n costs, per
the nodal cost identity,

    r * (1 - a0) * (1 - a_n) + r * (1 - a_n)

so a leaf hit is free, a leaf miss answered by the parent costs 1 per
request, and a miss at both tiers costs 2. Because leaves never see the
parent's contents, one leaf simulation (phase A) serves every parent
policy (phase B): per interval it yields the weighted missed-demand
counts w1, the aggregate state s0, and the forwarded miss events.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels, rng as streams
from .actions import top_m_action
from .popularity import PopularityChain, step_chain

BASELINE_CODES = {"lru": 0, "fifo": 1, "lfu": 2}


def leaf_cost(a_n: np.ndarray, r_n: np.ndarray, a0: np.ndarray) -> np.ndarray:
    """Per-file cost vector of one leaf slot."""
    if not len(a_n) == len(r_n) == len(a0):
        raise ValueError("length mismatch")
    rf = np.asarray(r_n, dtype=np.float64)
    leaf_miss = 1.0 - np.asarray(a_n, dtype=np.float64)
    parent_miss = 1.0 - np.asarray(a0, dtype=np.float64)
    return rf * parent_miss * leaf_miss + rf * leaf_miss


def slot_avg_cost(slots: list[tuple[np.ndarray, np.ndarray]], a0: np.ndarray) -> np.ndarray:
    """Mean of leaf_cost over an interval's (action, requests) slot records."""
    if not slots:
        raise ValueError("no slot records")
    total = np.zeros(len(a0))
    for a_n, r_n in slots:
        total += leaf_cost(a_n, r_n, a0)
    return total / len(slots)


def parent_cost(leaf_costs: list[np.ndarray], weights: np.ndarray) -> np.ndarray:
    """Weighted sum of slot-averaged leaf cost vectors."""
    if len(leaf_costs) != len(weights):
        raise ValueError("one cost vector per leaf required")
    total = np.zeros(len(leaf_costs[0]))
    for w, c in zip(weights, leaf_costs):
        total += w * c
    return total


def aggregate_state(sbar: list[np.ndarray], leaf_caches: list[int], weights: np.ndarray) -> np.ndarray:
    """s0 = sum_n w_n * sbar_n * (1 - top_Mn(sbar_n)).

    Each leaf's own prospective cache (top-M of its mean demand) is zeroed
    out: the parent only sees demand the leaf would not serve itself.
    """
    if not len(sbar) == len(leaf_caches) == len(weights):
        raise ValueError("per-leaf inputs must align")
    s0 = np.zeros(len(sbar[0]))
    for w, s, m in zip(weights, sbar, leaf_caches):
        pi = top_m_action(s, m)
        s0 += w * s * (1.0 - pi)
    return s0


class SmoothedLeaf:
    """Leaf policy: cache the top-M of exponentially smoothed demand."""

    def __init__(self, capacity: int, n_files: int, rho: float = 0.3):
        if not 0.0 < rho <= 1.0:
            raise ValueError("rho must lie in (0, 1]")
        self.capacity = capacity
        self.rho = rho
        self.smoothed = np.zeros(n_files)

    def action(self) -> np.ndarray:
        return top_m_action(self.smoothed, self.capacity)

    def observe(self, requests: np.ndarray) -> np.ndarray:
        """Fold one slot's request counts in; returns the next slot's action."""
        self.smoothed = (1.0 - self.rho) * self.smoothed + self.rho * np.asarray(requests, dtype=np.float64)
        return self.action()


def leaf_policy_step(leaf: SmoothedLeaf, requests: np.ndarray) -> np.ndarray:
    return leaf.observe(requests)


@dataclass
class TwoTierNetwork:
    """Reference stepwise simulator; the kernel path below is equivalent."""

    leaf_chains: list[PopularityChain]
    leaf_cache: int
    weights: np.ndarray
    slots_per_interval: int
    requests_per_slot: int
    rho: float = 0.3
    seed: int = 0

    def __post_init__(self) -> None:
        n = len(self.leaf_chains)
        if self.weights.shape != (n,):
            raise ValueError("one weight per leaf required")
        n_files = self.leaf_chains[0].n_files
        init = streams.stream(self.seed, streams.NET_INIT)
        self.leaf_states = [int(init.integers(c.n_states)) for c in self.leaf_chains]
        self.leaves = [SmoothedLeaf(self.leaf_cache, n_files, self.rho) for _ in range(n)]
        self._leaf_rngs = [streams.stream(self.seed, streams.LEAF_BASE + i) for i in range(n)]

    @property
    def n_files(self) -> int:
        return self.leaf_chains[0].n_files

    def run_interval(self, a0: np.ndarray) -> tuple[np.ndarray, np.ndarray, list[dict]]:
        """Simulate T slots under parent contents a0.

        Returns (s0, c0 vector, per-leaf records). Records hold the slot
        actions, request counts, interval mean demand, and averaged cost.
        """
        n = len(self.leaf_chains)
        n_files = self.n_files
        records = [
            {"slots": [], "sbar": np.zeros(n_files), "cbar": None} for _ in range(n)
        ]
        for _t in range(self.slots_per_interval):
            for i in range(n):
                rng = self._leaf_rngs[i]
                self.leaf_states[i] = step_chain(self.leaf_chains[i], self.leaf_states[i], rng)
                profile = self.leaf_chains[i].states[self.leaf_states[i]]
                cdf = np.cumsum(profile)
                draws = np.searchsorted(cdf, rng.uniform(0.0, 1.0, size=self.requests_per_slot), side="right")
                counts = np.bincount(draws.clip(0, n_files - 1), minlength=n_files).astype(np.float64)
                a_n = self.leaves[i].action()
                records[i]["slots"].append((a_n, counts))
                records[i]["sbar"] += counts
                self.leaves[i].observe(counts)
        for i in range(n):
            records[i]["sbar"] /= self.slots_per_interval
            records[i]["cbar"] = slot_avg_cost(records[i]["slots"], a0)
        s0 = aggregate_state([r["sbar"] for r in records], [self.leaf_cache] * n, self.weights)
        c0 = parent_cost([r["cbar"] for r in records], self.weights)
        return s0, c0, records


@dataclass
class LeafPhase:
    """Arm-independent leaf simulation for a whole run."""

    w1: np.ndarray  # (intervals, F) weighted missed-request counts
    s0: np.ndarray  # (intervals, F) aggregate states
    ev_leaf: np.ndarray  # (E,) int32
    ev_file: np.ndarray  # (E,) int32
    ev_count: np.ndarray  # (intervals,) cumulative event counts
    weights: np.ndarray
    slots_per_interval: int
    requests_per_slot: int

    @property
    def n_intervals(self) -> int:
        return self.w1.shape[0]

    @property
    def n_files(self) -> int:
        return self.w1.shape[1]


def simulate_leaves(
    leaf_chains: list[PopularityChain],
    weights: np.ndarray,
    leaf_cache: int,
    rho: float,
    n_intervals: int,
    slots_per_interval: int,
    requests_per_slot: int,
    seed: int,
) -> LeafPhase:
    """Kernel-backed phase A: simulate every leaf once for this seed."""
    n = len(leaf_chains)
    n_files = leaf_chains[0].n_files
    total_slots = n_intervals * slots_per_interval
    init = streams.stream(seed, streams.NET_INIT)
    lpaths = np.empty((n, total_slots), dtype=np.int64)
    u_req = np.empty((n, total_slots, requests_per_slot))
    cum_profiles = np.empty((n, leaf_chains[0].n_states, n_files))
    for i, chain in enumerate(leaf_chains):
        if chain.n_states != leaf_chains[0].n_states:
            raise ValueError("leaf chains must share a state count")
        start = int(init.integers(chain.n_states))
        leaf_rng = streams.stream(seed, streams.LEAF_BASE + i)
        # one state draw then R request draws per slot, same order as the
        # stepwise reference simulator
        block = leaf_rng.uniform(0.0, 1.0, size=(total_slots, 1 + requests_per_slot))
        u_states = np.ascontiguousarray(block[:, 0])
        u_req[i] = block[:, 1:]
        _kernels.chain_path(chain.cumulative_rows(), start, u_states, lpaths[i])
        cum_profiles[i] = np.cumsum(chain.states, axis=1)
    w1 = np.zeros((n_intervals, n_files))
    s0 = np.zeros((n_intervals, n_files))
    cap = n * total_slots * requests_per_slot
    ev_leaf = np.empty(cap, dtype=np.int32)
    ev_file = np.empty(cap, dtype=np.int32)
    ev_count = np.zeros(n_intervals, dtype=np.int64)
    m_state = np.zeros((n, n_files))
    n_events = _kernels.leaf_phase(
        cum_profiles,
        lpaths,
        u_req,
        np.asarray(weights, dtype=np.float64),
        leaf_cache,
        float(rho),
        n_intervals,
        slots_per_interval,
        m_state,
        w1,
        s0,
        ev_leaf,
        ev_file,
        ev_count,
    )
    return LeafPhase(
        w1,
        s0,
        ev_leaf[:n_events].copy(),
        ev_file[:n_events].copy(),
        ev_count,
        np.asarray(weights, dtype=np.float64),
        slots_per_interval,
        requests_per_slot,
    )


def static_arm_costs(phase: LeafPhase, a0_per_interval: np.ndarray) -> np.ndarray:
    """Interval costs of a parent whose contents are fixed within intervals.

    cost(tau) = (2 * sum(w1) - w1 . a0) / T: every forwarded miss costs 2
    minus 1 for each request the parent catches.
    """
    a0f = a0_per_interval.astype(np.float64)
    totals = 2.0 * phase.w1.sum(axis=1) - np.einsum("if,if->i", phase.w1, a0f)
    return totals / phase.slots_per_interval


def nocache_costs(phase: LeafPhase) -> np.ndarray:
    return 2.0 * phase.w1.sum(axis=1) / phase.slots_per_interval


def noncausal_costs(phase: LeafPhase, parent_cache: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-interval cost of the clairvoyant static parent, and its actions.

    Knows the interval's missed demand ahead of time; top-M of w1 is the
    best static cache for that interval, so this lower-bounds every
    per-interval static policy.
    """
    n_i, n_files = phase.w1.shape
    actions = np.zeros((n_i, n_files), dtype=np.int8)
    for tau in range(n_i):
        actions[tau] = top_m_action(phase.w1[tau], parent_cache)
    return static_arm_costs(phase, actions), actions


def baseline_costs(phase: LeafPhase, policy: str, parent_cache: int) -> np.ndarray:
    """Per-interval cost of an evicting parent (LRU, FIFO, or LFU)."""
    code = BASELINE_CODES[policy]
    costs = np.empty(phase.n_intervals)
    _kernels.event_arm_run(
        phase.ev_leaf,
        phase.ev_file,
        phase.ev_count,
        phase.weights,
        code,
        parent_cache,
        phase.n_files,
        phase.slots_per_interval,
        costs,
    )
    return costs


def file_cost_vector(phase: LeafPhase, tau: int, a0: np.ndarray) -> np.ndarray:
    """Per-file interval cost under parent contents a0."""
    return phase.w1[tau] * (2.0 - a0.astype(np.float64)) / phase.slots_per_interval
