"""Classic eviction policies (LRU, LFU, FIFO) over a single-request stream.

Reference implementations. The network harness replays the same event
stream through compiled kernels; these classes define the semantics the
kernels must reproduce:

 - caches fill before they evict,
 - hit/miss is decided against the contents before any update,
 - LRU refreshes recency on hit, FIFO does not touch insertion order,
 - LFU counts every request to a file (cached or not) and evicts the
   cached file with the smallest global count, ties to the lowest index.
"""

from __future__ import annotations

import numpy as np

from .actions import top_m_action


class LRUCache:
    def __init__(self, capacity: int, n_files: int):
        self.capacity = capacity
        self.n_files = n_files
        self._last: dict[int, int] = {}
        self._clock = 0

    def request(self, f: int) -> bool:
        self._clock += 1
        hit = f in self._last
        if hit:
            self._last[f] = self._clock
        elif self.capacity > 0:
            if len(self._last) >= self.capacity:
                victim = min(self._last, key=lambda k: self._last[k])
                del self._last[victim]
            self._last[f] = self._clock
        return hit

    def contents(self) -> np.ndarray:
        a = np.zeros(self.n_files, dtype=np.int8)
        for f in self._last:
            a[f] = 1
        return a


class FIFOCache:
    def __init__(self, capacity: int, n_files: int):
        self.capacity = capacity
        self.n_files = n_files
        self._arrival: dict[int, int] = {}
        self._clock = 0

    def request(self, f: int) -> bool:
        self._clock += 1
        hit = f in self._arrival
        if not hit and self.capacity > 0:
            if len(self._arrival) >= self.capacity:
                victim = min(self._arrival, key=lambda k: self._arrival[k])
                del self._arrival[victim]
            self._arrival[f] = self._clock
        return hit

    def contents(self) -> np.ndarray:
        a = np.zeros(self.n_files, dtype=np.int8)
        for f in self._arrival:
            a[f] = 1
        return a


class LFUCache:
    """Perfect LFU: frequency counts cover the whole stream, not just residents."""

    def __init__(self, capacity: int, n_files: int):
        self.capacity = capacity
        self.n_files = n_files
        self.counts = np.zeros(n_files, dtype=np.int64)
        self._resident: set[int] = set()

    def request(self, f: int) -> bool:
        self.counts[f] += 1
        hit = f in self._resident
        if not hit and self.capacity > 0:
            if len(self._resident) >= self.capacity:
                # min on (count, index): lowest index wins ties
                victim = min(self._resident, key=lambda k: (self.counts[k], k))
                self._resident.discard(victim)
            self._resident.add(f)
        return hit

    def contents(self) -> np.ndarray:
        a = np.zeros(self.n_files, dtype=np.int8)
        for f in self._resident:
            a[f] = 1
        return a


POLICIES = {"lru": LRUCache, "fifo": FIFOCache, "lfu": LFUCache}


def make_cache(policy: str, capacity: int, n_files: int):
    try:
        cls = POLICIES[policy]
    except KeyError:
        raise ValueError(f"unknown eviction policy {policy!r}") from None
    return cls(capacity, n_files)


def baseline_serve(cache, request: int):
    """Serve one request through an eviction cache.

    The cache object embodies its policy; it is updated in place and
    returned alongside the hit flag so call sites can thread the state.
    """
    hit = cache.request(int(request))
    return hit, cache


def noncausal_best(window, m: int) -> np.ndarray:
    """Best fixed cache for a known stretch of requests.

    window holds per-slot request-count vectors; the result caches the m
    files with the largest total count (lowest index on ties).
    """
    arr = np.atleast_2d(np.asarray(window, dtype=np.float64))
    if arr.size == 0:
        raise ValueError("request window must be nonempty")
    totals = arr.sum(axis=0)
    return top_m_action(totals, m)
