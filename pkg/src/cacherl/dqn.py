"""Deep Q agent for the parent cache, split into per-group nets.

The F files are partitioned into K contiguous groups; group k owns a
small net mapping its slice of the aggregate state to per-file predicted
long-term costs. Caching decisions take the M0 largest predictions over
the concatenated output. Training is vanilla DQN machinery: experience
replay, a periodically synced target copy, and a masked squared loss
that only scores files the chosen action left uncached.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .actions import top_m_action
from .nn import FeedforwardNet, masked_l2_loss


@dataclass
class Experience:
    s_prev: np.ndarray  # (F,)
    action: np.ndarray  # (F,) int8, M0 ones
    cost: np.ndarray  # (F,) per-file cost vector
    s_new: np.ndarray  # (F,)

    def __post_init__(self) -> None:
        n = len(self.s_prev)
        if not (len(self.action) == len(self.cost) == len(self.s_new) == n):
            raise ValueError("experience fields must share one length")


class ReplayBuffer:
    """Bounded FIFO of experiences with uniform sampling."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._items: list[Experience] = []
        self._next = 0

    def __len__(self) -> int:
        return len(self._items)

    def push(self, exp: Experience) -> None:
        if len(self._items) < self.capacity:
            self._items.append(exp)
        else:
            self._items[self._next] = exp
            self._next = (self._next + 1) % self.capacity

    def sample(self, batch: int, rng: np.random.Generator) -> list[Experience]:
        k = min(batch, len(self._items))
        idx = rng.choice(len(self._items), size=k, replace=False)
        return [self._items[i] for i in idx]


def partition_bounds(partition: list[int], n_files: int) -> list[tuple[int, int]]:
    if sum(partition) != n_files:
        raise ValueError(f"partition sums to {sum(partition)}, expected {n_files}")
    bounds = []
    start = 0
    for size in partition:
        bounds.append((start, start + size))
        start += size
    return bounds


def partition_state(s0: np.ndarray, partition: list[int]) -> list[np.ndarray]:
    """Contiguous split of the state in file-index order."""
    return [s0[a:b] for a, b in partition_bounds(partition, len(s0))]


def even_partition(n_files: int, k: int) -> list[int]:
    """K group sizes as equal as possible, larger groups first."""
    if not 1 <= k <= n_files:
        raise ValueError("need 1 <= k <= n_files")
    base, extra = divmod(n_files, k)
    return [base + 1] * extra + [base] * (k - extra)


class HyperDQN:
    """K group nets plus their target copies."""

    def __init__(
        self,
        partition: list[int],
        gamma: float,
        sync_every: int = 50,
        head: str = "linear",
        hidden_factor: int = 2,
        rng: np.random.Generator | None = None,
    ):
        if not 0.0 <= gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if sync_every < 1:
            raise ValueError("sync_every must be >= 1")
        self.partition = list(int(p) for p in partition)
        self.n_files = sum(self.partition)
        self.bounds = partition_bounds(self.partition, self.n_files)
        self.gamma = float(gamma)
        self.sync_every = sync_every
        self.train_count = 0
        self.nets = [
            FeedforwardNet([fk, hidden_factor * fk, fk], head=head, rng=rng) for fk in self.partition
        ]
        self.targets = [net.clone() for net in self.nets]

    def predict_costs(self, s0: np.ndarray, use_target: bool = False) -> np.ndarray:
        """Concatenated per-group forward passes."""
        nets = self.targets if use_target else self.nets
        out = np.empty(self.n_files)
        for net, (a, b) in zip(nets, self.bounds):
            out[a:b] = net.forward(s0[a:b])
        return out

    def select_action(self, s0: np.ndarray, m0: int, epsilon: float, rng: np.random.Generator) -> np.ndarray:
        """Greedy top-M0 of predicted costs, or a uniform M0-subset."""
        if rng.uniform() < epsilon:
            a = np.zeros(self.n_files, dtype=np.int8)
            a[rng.choice(self.n_files, size=m0, replace=False)] = 1
            return a
        return top_m_action(self.predict_costs(s0), m0)

    def target_error(self, exp: Experience) -> np.ndarray:
        """[c + gamma * Q_target(s_new) - Q(s_prev)] masked to uncached files."""
        boot = self.predict_costs(exp.s_new, use_target=True)
        online = self.predict_costs(exp.s_prev)
        mask = 1.0 - exp.action.astype(np.float64)
        return (exp.cost + self.gamma * boot - online) * mask

    def train_batch(self, buffer: ReplayBuffer, batch: int, lr: float, rng: np.random.Generator) -> bool:
        """One SGD step per group net on a uniform replay sample.

        Empty buffer: no-op, returns False.
        """
        if len(buffer) == 0:
            return False
        sample = buffer.sample(batch, rng)
        b = len(sample)
        s_prev = np.stack([e.s_prev for e in sample])
        s_new = np.stack([e.s_new for e in sample])
        costs = np.stack([e.cost for e in sample])
        masks = 1.0 - np.stack([e.action for e in sample]).astype(np.float64)
        for net, tgt, (a, bnd) in zip(self.nets, self.targets, self.bounds):
            boot = tgt.forward_batch(s_new[:, a:bnd])
            target = costs[:, a:bnd] + self.gamma * boot
            net.train_step(s_prev[:, a:bnd], target, masks[:, a:bnd], lr)
        self.train_count += 1
        return True

    def batch_loss(self, buffer_sample: list[Experience]) -> float:
        """Mean masked loss of a sample under current nets; diagnostics only."""
        total = 0.0
        for exp in buffer_sample:
            mask = 1.0 - exp.action.astype(np.float64)
            boot = self.predict_costs(exp.s_new, use_target=True)
            online = self.predict_costs(exp.s_prev)
            total += masked_l2_loss(online, exp.cost + self.gamma * boot, mask)
        return total / max(1, len(buffer_sample))

    def maybe_sync_target(self) -> bool:
        """Clone online into target when the train counter hits the period."""
        if self.train_count % self.sync_every == 0:
            for net, tgt in zip(self.nets, self.targets):
                net.clone_into(tgt)
            return True
        return False

    def save(self, directory: str) -> None:
        os.makedirs(directory, exist_ok=True)
        manifest = {
            "partition": self.partition,
            "gamma": self.gamma,
            "sync_every": self.sync_every,
            "train_count": self.train_count,
            "head": self.nets[0].head,
        }
        with open(os.path.join(directory, "manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh)
        for k, (net, tgt) in enumerate(zip(self.nets, self.targets)):
            net.save(os.path.join(directory, f"group{k:03d}.net"))
            tgt.save(os.path.join(directory, f"group{k:03d}.target.net"))

    @classmethod
    def load(cls, directory: str) -> "HyperDQN":
        with open(os.path.join(directory, "manifest.json"), encoding="utf-8") as fh:
            manifest = json.load(fh)
        agent = cls(
            manifest["partition"],
            manifest["gamma"],
            manifest["sync_every"],
            head=manifest["head"],
        )
        agent.train_count = manifest["train_count"]
        agent.nets = [
            FeedforwardNet.load(os.path.join(directory, f"group{k:03d}.net"))
            for k in range(len(agent.partition))
        ]
        agent.targets = [
            FeedforwardNet.load(os.path.join(directory, f"group{k:03d}.target.net"))
            for k in range(len(agent.partition))
        ]
        return agent


def epsilon_anneal(interval: int, total: int, start: float = 1.0, floor: float = 0.05, frac: float = 0.2) -> float:
    """Linear decay from start to floor over the first frac of intervals."""
    ramp = max(1, int(total * frac))
    if interval >= ramp:
        return floor
    return start + (floor - start) * (interval / ramp)
