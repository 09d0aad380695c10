"""Kernel-level checks plus numba/pure-python parity.

Parity runs re-execute a pinned workload in a subprocess with
CACHERL_NO_NUMBA=1 and compare digests bit for bit against the in-process
(numba, when available) results.
"""

import os
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from cacherl import _kernels


class TestChainPath:
    def test_deterministic_two_state(self):
        # rows [1,0] and [0,1] freeze the walk wherever it starts
        cum = np.array([[1.0, 1.0], [0.0, 1.0]])
        out = np.empty(5, dtype=np.int64)
        _kernels.chain_path(cum, 0, np.linspace(0.1, 0.9, 5), out)
        np.testing.assert_array_equal(out, np.zeros(5))
        _kernels.chain_path(cum, 1, np.linspace(0.1, 0.9, 5), out)
        np.testing.assert_array_equal(out, np.ones(5))

    def test_inverse_cdf_thresholds(self):
        # from state 0: u < 0.3 stays, otherwise moves
        cum = np.array([[0.3, 1.0], [0.5, 1.0]])
        out = np.empty(3, dtype=np.int64)
        _kernels.chain_path(cum, 0, np.array([0.29, 0.31, 0.49]), out)
        np.testing.assert_array_equal(out, [0, 1, 0])

    def test_u_equal_one_clamped(self):
        cum = np.array([[0.5, 1.0], [0.5, 1.0]])
        out = np.empty(1, dtype=np.int64)
        _kernels.chain_path(cum, 0, np.array([1.0]), out)
        assert out[0] == 1


class TestDrawCategorical:
    def test_thresholds(self):
        cum = np.array([0.2, 0.7, 1.0])
        assert _kernels.draw_categorical(cum, 0.19) == 0
        assert _kernels.draw_categorical(cum, 0.2) == 1
        assert _kernels.draw_categorical(cum, 0.69) == 1
        assert _kernels.draw_categorical(cum, 0.99) == 2
        assert _kernels.draw_categorical(cum, 1.0) == 2


class TestTopMMask:
    def test_ties_to_lowest_index(self):
        out = np.zeros(4, dtype=np.int8)
        _kernels.top_m_mask(np.array([1.0, 1.0, 1.0, 1.0]), 2, out)
        np.testing.assert_array_equal(out, [1, 1, 0, 0])

    def test_matches_python_reference(self):
        from cacherl.actions import top_m_action

        rng = np.random.default_rng(0)
        for _ in range(100):
            v = rng.integers(0, 4, size=8).astype(np.float64)
            out = np.zeros(8, dtype=np.int8)
            _kernels.top_m_mask(v, 3, out)
            np.testing.assert_array_equal(out, top_m_action(v, 3))


class TestRandomSubsetMask:
    def test_cardinality_and_range(self):
        rng = np.random.default_rng(1)
        scratch = np.empty(10, dtype=np.int64)
        out = np.zeros(10, dtype=np.int8)
        for _ in range(50):
            _kernels.random_subset_mask(10, 4, rng.uniform(size=4), scratch, out)
            assert out.sum() == 4

    def test_uniform_over_subsets(self):
        from math import comb

        rng = np.random.default_rng(2)
        scratch = np.empty(5, dtype=np.int64)
        out = np.zeros(5, dtype=np.int8)
        counts: dict[bytes, int] = {}
        n = 30_000
        for _ in range(n):
            _kernels.random_subset_mask(5, 2, rng.uniform(size=2), scratch, out)
            key = out.tobytes()
            counts[key] = counts.get(key, 0) + 1
        assert len(counts) == comb(5, 2)
        freqs = np.array(list(counts.values())) / n
        np.testing.assert_allclose(freqs, 1 / comb(5, 2), atol=0.01)


PARITY_SCRIPT = textwrap.dedent(
    """
    import json
    import numpy as np
    from cacherl import _kernels
    from cacherl.popularity import zipf_chain, random_chain, with_stickiness
    from cacherl.rng import stream
    from cacherl.tabular_q import run_q_learning
    from cacherl.linear_q import run_linear_q, StepSizes
    from cacherl.network import simulate_leaves, baseline_costs
    from cacherl.trajectories import EpsilonSchedule, LearningSchedule

    g = zipf_chain(2, 10, [1.0, 1.5], stream(7, 50), random_orderings=True)
    l = zipf_chain(2, 10, [0.7, 2.5], stream(7, 51), random_orderings=True)
    _, tab = run_q_learning(
        g, l, 2, (10.0, 600.0, 1000.0), 0.9,
        LearningSchedule(0.8, EpsilonSchedule("constant", 0.05)), 500, seed=3,
    )
    _, lin = run_linear_q(
        g, l, 2, (10.0, 600.0, 1000.0), 0.9,
        StepSizes(0.005, 0.005, 0.005), EpsilonSchedule("constant", 0.05), 500, seed=3,
    )
    chains = [
        with_stickiness(random_chain(2, 20, (0.7, 2.5), stream(5, 1000 + i)), 0.9)
        for i in range(3)
    ]
    phase = simulate_leaves(chains, np.full(3, 1.0 / 3.0), 2, 0.3, 50, 2, 5, seed=11)
    lru = baseline_costs(phase, "lru", 3)
    print(json.dumps({
        "numba": _kernels.NUMBA_ACTIVE,
        "tab": [float(x) for x in (tab.sum(), tab[-1])],
        "lin": [float(x) for x in (lin.sum(), lin[-1])],
        "phase": [float(phase.w1.sum()), float(phase.s0.sum()), int(phase.ev_leaf.shape[0])],
        "lru": [float(lru.sum()), float(lru[-1])],
    }))
    """
)


def run_parity(no_numba: bool) -> dict:
    import json

    env = dict(os.environ)
    if no_numba:
        env["CACHERL_NO_NUMBA"] = "1"
    else:
        env.pop("CACHERL_NO_NUMBA", None)
    proc = subprocess.run(
        [sys.executable, "-c", PARITY_SCRIPT], capture_output=True, text=True, env=env
    )
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


class TestFallbackParity:
    def test_env_flag_disables_numba(self):
        assert run_parity(no_numba=True)["numba"] is False

    def test_paths_bitwise_identical(self):
        # the pure-python path must reproduce the compiled path exactly
        fast = run_parity(no_numba=False)
        slow = run_parity(no_numba=True)
        for key in ("tab", "lin", "phase", "lru"):
            assert fast[key] == slow[key], key

    def test_in_process_matches_subprocess_digest(self):
        from cacherl.network import baseline_costs, simulate_leaves
        from cacherl.popularity import random_chain, with_stickiness
        from cacherl.rng import stream

        chains = [
            with_stickiness(random_chain(2, 20, (0.7, 2.5), stream(5, 1000 + i)), 0.9)
            for i in range(3)
        ]
        phase = simulate_leaves(chains, np.full(3, 1.0 / 3.0), 2, 0.3, 50, 2, 5, seed=11)
        lru = baseline_costs(phase, "lru", 3)
        slow = run_parity(no_numba=True)
        assert [float(phase.w1.sum()), float(phase.s0.sum()), int(phase.ev_leaf.shape[0])] == slow["phase"]
        assert [float(lru.sum()), float(lru[-1])] == slow["lru"]
