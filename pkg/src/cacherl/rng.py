"""Seeded RNG streams.

Every experiment owns a single integer seed. Components draw from
independent PCG64 streams derived from (seed, channel) so that, e.g., the
popularity chains walked by a learner and by the oracle rollout consume
exactly the same random numbers regardless of how much randomness the
agents themselves burn.
"""

from __future__ import annotations

import numpy as np

# Fixed channel offsets. Changing these silently changes every trajectory,
# so treat them as part of the on-disk format.
CHAIN_GLOBAL = 0
CHAIN_LOCAL = 1
INIT = 2
ENV = 3
AGENT = 4
REQUESTS = 5
NET_INIT = 6
REPLAY = 7
COMPARE = 8
INIT_ACTION = 9
LEAF_BASE = 100  # leaf n uses channel LEAF_BASE + n


def stream(seed: int, channel: int) -> np.random.Generator:
    """Independent generator for (seed, channel)."""
    if seed < 0 or channel < 0:
        raise ValueError("seed and channel must be nonnegative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, channel))))
