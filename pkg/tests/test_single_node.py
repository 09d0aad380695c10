import numpy as np
import pytest

from cacherl import rng as streams
from cacherl.actions import enumerate_actions
from cacherl.popularity import PopularityChain, zipf_chain
from cacherl.single_node import SingleNodeEnv, cost_tables, slot_cost


class TestSlotCost:
    def test_refresh_only(self):
        c = slot_cost(
            np.array([1, 0]), np.array([0, 1]),
            np.zeros(2), np.zeros(2), (10.0, 0.0, 0.0),
        )
        assert c == 10.0

    def test_no_change_no_refresh(self):
        a = np.array([1, 0])
        assert slot_cost(a, a, np.zeros(2), np.zeros(2), (10.0, 0.0, 0.0)) == 0.0

    def test_local_miss_term(self):
        c = slot_cost(
            np.array([1, 0]), np.array([1, 0]),
            np.zeros(2), np.array([0.5, 0.5]), (0.0, 2.0, 0.0),
        )
        assert c == 1.0

    def test_global_miss_term(self):
        c = slot_cost(
            np.array([1, 0]), np.array([1, 0]),
            np.array([0.2, 0.8]), np.zeros(2), (0.0, 0.0, 3.0),
        )
        assert c == pytest.approx(2.4)

    def test_combined_hand_value(self):
        c = slot_cost(
            np.array([0, 1]), np.array([1, 0]),
            np.array([0.2, 0.8]), np.array([0.5, 0.5]), (1.0, 2.0, 3.0),
        )
        assert c == pytest.approx(4.4)

    def test_all_lambdas_zero(self):
        c = slot_cost(
            np.array([0, 1]), np.array([1, 0]),
            np.array([0.2, 0.8]), np.array([0.5, 0.5]), (0.0, 0.0, 0.0),
        )
        assert c == 0.0

    def test_uniform_global_closed_form(self):
        f, m = 8, 3
        a = np.zeros(f)
        a[:m] = 1
        c = slot_cost(a, a, np.full(f, 1 / f), np.zeros(f), (0.0, 0.0, 5.0))
        assert c == pytest.approx(5.0 * (f - m) / f)

    def test_disjoint_caches_full_refresh(self):
        a_old = np.array([1, 1, 0, 0])
        a_new = np.array([0, 0, 1, 1])
        c = slot_cost(a_old, a_new, np.zeros(4), np.zeros(4), (7.0, 0.0, 0.0))
        assert c == 14.0


class TestCostTables:
    def test_matches_slot_cost(self, small_chains):
        g, l = small_chains
        acts = enumerate_actions(4, 2)
        pg, pl = g.states[:, :4], l.states[:, :4]
        pg = pg / pg.sum(axis=1, keepdims=True)
        pl = pl / pl.sum(axis=1, keepdims=True)
        lam = (10.0, 600.0, 1000.0)
        refresh, miss_l, miss_g = cost_tables(pg, pl, acts, lam)
        for ap in range(len(acts)):
            for an in range(len(acts)):
                for i in range(2):
                    for j in range(2):
                        direct = slot_cost(acts[ap], acts[an], pg[i], pl[j], lam)
                        table = refresh[ap, an] + miss_l[j, an] + miss_g[i, an]
                        assert table == pytest.approx(direct)


class TestSingleNodeEnv:
    def test_cost_zero_when_miss_terms_off(self, small_chains):
        g, l = small_chains
        env = SingleNodeEnv(g, l, 2, (10.0, 0.0, 0.0), seed=0)
        g0, l0, a0 = env.reset()
        cost, _, _ = env.step(a0)  # unchanged action, no refresh
        assert cost == 0.0

    def test_deterministic_single_state(self):
        states = np.array([[0.6, 0.4]])
        trans = np.array([[1.0]])
        chain = PopularityChain(states=states, transition=trans)
        env = SingleNodeEnv(chain, chain, 1, (0.0, 1.0, 1.0), seed=4, observe="exact")
        env.reset()
        a = np.array([1, 0])
        c1, _, _ = env.step(a)
        c2, _, _ = env.step(a)
        assert c1 == c2 == pytest.approx(0.4 + 0.4)

    def test_stationary_average_matches_closed_form(self):
        g = PopularityChain(
            states=np.array([[0.7, 0.3], [0.2, 0.8]]),
            transition=np.array([[0.9, 0.1], [0.4, 0.6]]),
        )
        env = SingleNodeEnv(g, g, 1, (0.0, 1.0, 1.0), seed=8)
        env.reset()
        a = np.array([1, 0])
        t = 100_000
        costs = np.array([env.step(a)[0] for _ in range(t)])
        pi = g.stationary()
        per_state = g.states[:, 1] * 2.0  # uncached file mass, both terms
        expect = float(pi @ per_state)
        assert abs(costs.mean() - expect) / expect < 0.01

    def test_observe_mode_validated(self, small_chains):
        g, l = small_chains
        with pytest.raises(ValueError):
            SingleNodeEnv(g, l, 2, (1.0, 1.0, 1.0), seed=0, observe="true")

    def test_empirical_observation_differs(self, small_chains):
        g, l = small_chains
        exact = SingleNodeEnv(g, l, 2, (10.0, 600.0, 1000.0), seed=5, observe="exact")
        emp = SingleNodeEnv(
            g, l, 2, (10.0, 600.0, 1000.0), seed=5, observe="empirical", requests_per_slot=3
        )
        exact.reset()
        emp.reset()
        # same seed, same true trajectory law, but the observed local state
        # comes from sparse request draws and may disagree
        a = np.zeros(10, dtype=np.int64)
        a[:2] = 1
        seen_exact = [exact.step(a)[2] for _ in range(50)]
        seen_emp = [emp.step(a)[2] for _ in range(50)]
        assert seen_exact != seen_emp
