"""Cache actions: binary vectors of length F with exactly M ones."""

from __future__ import annotations

import itertools
import math

import numpy as np

# C(20, 10) = 184756 actions is the most we ever materialize.
ENUMERATE_MAX_FILES = 20


def enumerate_actions(n_files: int, m: int) -> np.ndarray:
    """All (C(F, M), F) binary action vectors in lexicographic order.

    Row order follows itertools.combinations of the cached-file index sets,
    so row 0 caches files 0..M-1 and the last row caches F-M..F-1.
    """
    if not 0 <= m <= n_files:
        raise ValueError("need 0 <= m <= n_files")
    if n_files > ENUMERATE_MAX_FILES:
        raise ValueError(f"refusing to enumerate actions for n_files > {ENUMERATE_MAX_FILES}")
    count = math.comb(n_files, m)
    out = np.zeros((count, n_files), dtype=np.int8)
    for row, combo in enumerate(itertools.combinations(range(n_files), m)):
        out[row, list(combo)] = 1
    return out


def action_lookup(actions: np.ndarray) -> dict[bytes, int]:
    """Map action-vector bytes back to row index in an enumeration."""
    return {actions[i].tobytes(): i for i in range(actions.shape[0])}


def unrank_combination(n_files: int, m: int, rank: int) -> list[int]:
    """The index set at position `rank` of the lexicographic enumeration.

    Agrees with enumerate_actions row order without materializing it.
    """
    if not 0 <= rank < math.comb(n_files, m):
        raise ValueError("rank out of range")
    members: list[int] = []
    lo = 0
    for slot in range(m):
        for candidate in range(lo, n_files):
            block = math.comb(n_files - candidate - 1, m - slot - 1)
            if rank < block:
                members.append(candidate)
                lo = candidate + 1
                break
            rank -= block
    return members


def top_m_indices(values: np.ndarray, m: int) -> np.ndarray:
    """Indices of the m largest entries; ties broken toward lower index."""
    if not 0 <= m <= len(values):
        raise ValueError("need 0 <= m <= len(values)")
    order = np.argsort(-np.asarray(values, dtype=np.float64), kind="stable")
    return np.sort(order[:m])


def top_m_action(values: np.ndarray, m: int) -> np.ndarray:
    """Binary action caching the m largest entries (lowest-index tie-break)."""
    a = np.zeros(len(values), dtype=np.int8)
    a[top_m_indices(values, m)] = 1
    return a


def random_action(n_files: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random binary action with exactly m ones."""
    a = np.zeros(n_files, dtype=np.int8)
    a[rng.choice(n_files, size=m, replace=False)] = 1
    return a


def validate_action(a: np.ndarray, n_files: int, m: int) -> None:
    a = np.asarray(a)
    if a.shape != (n_files,):
        raise ValueError(f"action must have shape ({n_files},)")
    if not np.all((a == 0) | (a == 1)):
        raise ValueError("action entries must be 0 or 1")
    if int(a.sum()) != m:
        raise ValueError(f"action must cache exactly {m} files")
