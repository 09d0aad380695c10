"""Popularity profiles and the Markov chains that drive them.

A popularity profile is a probability vector over the F files. Profiles
evolve as a finite Markov chain: each chain state carries one profile and
the chain hops between states under a row-stochastic transition matrix.
Request vectors are per-slot counts per file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


def zipf_profile(n_files: int, eta: float, ordering: np.ndarray | None = None) -> np.ndarray:
    """Zipf law with exponent eta over a rank ordering of the files.

    ordering[k] is the file holding rank k+1; identity by default. The
    entry for the rank-f file is (1/f^eta) / sum_{l=1..F} 1/l^eta.
    """
    if n_files < 1:
        raise ValueError("n_files must be >= 1")
    if eta < 0:
        raise ValueError("eta must be >= 0")
    ranks = np.arange(1, n_files + 1, dtype=np.float64)
    weights = ranks ** (-float(eta))
    weights /= weights.sum()
    if ordering is None:
        return weights
    ordering = np.asarray(ordering)
    if sorted(ordering.tolist()) != list(range(n_files)):
        raise ValueError("ordering must be a permutation of 0..n_files-1")
    out = np.empty(n_files, dtype=np.float64)
    out[ordering] = weights
    return out


def random_transition(n_states: int, rng: np.random.Generator) -> np.ndarray:
    """Row-stochastic matrix with i.i.d. uniform(0,1) entries, row-normalized."""
    raw = rng.uniform(0.0, 1.0, size=(n_states, n_states))
    return raw / raw.sum(axis=1, keepdims=True)


@dataclass
class PopularityChain:
    """Markov-modulated popularity: one profile per chain state."""

    states: np.ndarray  # (n_states, n_files) profiles
    transition: np.ndarray  # (n_states, n_states)

    def __post_init__(self) -> None:
        self.states = np.asarray(self.states, dtype=np.float64)
        self.transition = np.asarray(self.transition, dtype=np.float64)
        if self.states.ndim != 2:
            raise ValueError("states must be 2-d (n_states, n_files)")
        s = self.states.shape[0]
        if self.transition.shape != (s, s):
            raise ValueError("transition must be (n_states, n_states)")
        if not np.allclose(self.transition.sum(axis=1), 1.0, atol=1e-9):
            raise ValueError("transition rows must sum to 1")
        if not np.allclose(self.states.sum(axis=1), 1.0, atol=1e-9):
            raise ValueError("profiles must sum to 1")
        if np.any(self.states < 0) or np.any(self.transition < 0):
            raise ValueError("probabilities must be nonnegative")

    @property
    def n_states(self) -> int:
        return self.states.shape[0]

    @property
    def n_files(self) -> int:
        return self.states.shape[1]

    def cumulative_rows(self) -> np.ndarray:
        """Row-wise transition CDF, for inverse-CDF stepping."""
        return np.cumsum(self.transition, axis=1)

    def stationary(self) -> np.ndarray:
        """Stationary distribution (left eigenvector at eigenvalue 1)."""
        vals, vecs = np.linalg.eig(self.transition.T)
        k = int(np.argmin(np.abs(vals - 1.0)))
        pi = np.abs(np.real(vecs[:, k]))
        return pi / pi.sum()

    def to_dict(self) -> dict:
        return {"states": self.states.tolist(), "transition": self.transition.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "PopularityChain":
        return cls(np.array(d["states"], dtype=np.float64), np.array(d["transition"], dtype=np.float64))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "PopularityChain":
        return cls.from_dict(json.loads(text))


def step_chain(chain: PopularityChain, state_idx: int, rng: np.random.Generator) -> int:
    """Next chain state, drawn from the transition row of state_idx."""
    if not 0 <= state_idx < chain.n_states:
        raise ValueError("state index out of range")
    u = float(rng.uniform())
    k = int(np.searchsorted(chain.cumulative_rows()[state_idx], u, side="right"))
    return min(k, chain.n_states - 1)


def zipf_chain(
    n_states: int,
    n_files: int,
    etas: "list[float] | np.ndarray",
    rng: np.random.Generator,
    random_orderings: bool = False,
) -> PopularityChain:
    """Chain whose state k carries a Zipf(etas[k]) profile.

    Identity rank order by default; random_orderings gives each state an
    independent random permutation of the ranks, so which files are
    popular changes from state to state.
    """
    etas = np.asarray(etas, dtype=np.float64)
    if etas.shape != (n_states,):
        raise ValueError("need one eta per chain state")
    profiles = np.stack(
        [
            zipf_profile(n_files, e, rng.permutation(n_files) if random_orderings else None)
            for e in etas
        ]
    )
    return PopularityChain(profiles, random_transition(n_states, rng))


def random_chain(
    num_states: int,
    n_files: int,
    eta_range: tuple[float, float],
    rng: np.random.Generator,
) -> PopularityChain:
    """Zipf states with exponents uniform in eta_range and random rank orderings."""
    lo, hi = (float(eta_range[0]), float(eta_range[1]))
    if not hi > lo:
        raise ValueError("eta_range must be a nonempty interval")
    if num_states < 1:
        raise ValueError("num_states must be >= 1")
    profiles = np.stack(
        [zipf_profile(n_files, rng.uniform(lo, hi), rng.permutation(n_files)) for _ in range(num_states)]
    )
    return PopularityChain(profiles, random_transition(num_states, rng))


def with_stickiness(chain: PopularityChain, stickiness: float) -> PopularityChain:
    """Blend self-transitions in: T' = s*I + (1-s)*T.

    Raises the chain's dwell time without touching its profiles, for
    workloads whose popularity shifts slowly.
    """
    if not 0.0 <= stickiness < 1.0:
        raise ValueError("stickiness must lie in [0, 1)")
    t = stickiness * np.eye(chain.n_states) + (1.0 - stickiness) * chain.transition
    return PopularityChain(chain.states.copy(), t)


def sample_requests(profile: np.ndarray, r: int, rng: np.random.Generator) -> np.ndarray:
    """Counts of r i.i.d. categorical draws from a profile."""
    if r < 0:
        raise ValueError("request count must be >= 0")
    n_files = len(profile)
    counts = np.zeros(n_files, dtype=np.int64)
    if r == 0:
        return counts
    cdf = np.cumsum(profile)
    idx = np.searchsorted(cdf, rng.uniform(0.0, 1.0, size=r), side="right").clip(0, n_files - 1)
    np.add.at(counts, idx, 1)
    return counts


def empirical_profile(requests: np.ndarray) -> np.ndarray:
    """Request counts normalized to a profile; zero requests is an error."""
    counts = np.asarray(requests, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise ValueError("no requests to normalize")
    return counts / total


def nearest_state(chain: PopularityChain, profile: np.ndarray) -> int:
    """Chain state closest in total variation; ties to the lowest index."""
    tv = 0.5 * np.abs(chain.states - profile[None, :]).sum(axis=1)
    return int(np.argmin(tv))
