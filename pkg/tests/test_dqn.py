import numpy as np
import pytest
from scipy.stats import spearmanr

from cacherl.dqn import (
    Experience,
    HyperDQN,
    ReplayBuffer,
    epsilon_anneal,
    even_partition,
    partition_bounds,
    partition_state,
)


def make_exp(f=4, rng=None):
    rng = rng or np.random.default_rng(0)
    a = np.zeros(f, dtype=np.int8)
    a[rng.choice(f, size=2, replace=False)] = 1
    return Experience(rng.normal(size=f), a, rng.normal(size=f), rng.normal(size=f))


class TestExperience:
    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            Experience(np.zeros(3), np.zeros(3, dtype=np.int8), np.zeros(2), np.zeros(3))


class TestReplayBuffer:
    def test_capacity_validated(self):
        with pytest.raises(ValueError):
            ReplayBuffer(0)

    def test_fifo_overwrite(self):
        buf = ReplayBuffer(2)
        rng = np.random.default_rng(1)
        a, b, c = make_exp(rng=rng), make_exp(rng=rng), make_exp(rng=rng)
        buf.push(a)
        buf.push(b)
        buf.push(c)
        assert len(buf) == 2
        assert buf._items[0] is c and buf._items[1] is b

    def test_sample_without_replacement(self):
        buf = ReplayBuffer(10)
        rng = np.random.default_rng(2)
        for _ in range(10):
            buf.push(make_exp(rng=rng))
        out = buf.sample(10, np.random.default_rng(0))
        assert len({id(e) for e in out}) == 10

    def test_sample_caps_at_size(self):
        buf = ReplayBuffer(100)
        buf.push(make_exp())
        assert len(buf.sample(32, np.random.default_rng(0))) == 1

    def test_sampling_is_uniform(self):
        # each of 8 slots should appear in ~1/8 of single-item draws
        buf = ReplayBuffer(8)
        rng = np.random.default_rng(3)
        items = [make_exp(rng=rng) for _ in range(8)]
        for e in items:
            buf.push(e)
        draws = 100_000
        counts = np.zeros(8)
        samp_rng = np.random.default_rng(4)
        ids = {id(e): i for i, e in enumerate(items)}
        for _ in range(draws):
            counts[ids[id(buf.sample(1, samp_rng)[0])]] += 1
        p = 1 / 8
        sigma = np.sqrt(p * (1 - p) / draws)
        assert np.all(np.abs(counts / draws - p) <= 3 * sigma)


class TestPartition:
    def test_even_partition_larger_first(self):
        assert even_partition(10, 3) == [4, 3, 3]
        assert even_partition(100, 5) == [20] * 5
        assert even_partition(7, 7) == [1] * 7

    def test_even_partition_validated(self):
        with pytest.raises(ValueError):
            even_partition(5, 6)
        with pytest.raises(ValueError):
            even_partition(5, 0)

    def test_bounds_cover_range(self):
        assert partition_bounds([4, 3, 3], 10) == [(0, 4), (4, 7), (7, 10)]
        with pytest.raises(ValueError):
            partition_bounds([4, 3], 10)

    def test_partition_state_slices(self):
        s = np.arange(10.0)
        parts = partition_state(s, [4, 3, 3])
        np.testing.assert_array_equal(parts[0], [0, 1, 2, 3])
        np.testing.assert_array_equal(parts[2], [7, 8, 9])


class TestHyperDQN:
    def test_constructor_validation(self):
        with pytest.raises(ValueError):
            HyperDQN([4], gamma=1.0)
        with pytest.raises(ValueError):
            HyperDQN([4], gamma=0.5, sync_every=0)

    def test_predict_concatenates_groups(self):
        agent = HyperDQN([2, 2], gamma=0.5)
        # identity-ish nets: write straight-through weights into each group
        for net in agent.nets:
            net.weights[0] = np.vstack([np.eye(2), -np.eye(2)])
            net.weights[1] = np.hstack([np.eye(2), np.zeros((2, 2))])
        out = agent.predict_costs(np.array([1.0, 2.0, 3.0, 4.0]))
        np.testing.assert_allclose(out, [1.0, 2.0, 3.0, 4.0])

    def test_select_action_greedy_hand_example(self):
        agent = HyperDQN([4], gamma=0.5)
        # bias-only net so predictions are a fixed vector [5, 1, 4, 2]
        agent.nets[0].weights[1][:] = 0.0
        agent.nets[0].biases[1][:] = np.array([5.0, 1.0, 4.0, 2.0])
        a = agent.select_action(np.zeros(4), 2, epsilon=0.0, rng=np.random.default_rng(0))
        np.testing.assert_array_equal(a, [1, 0, 1, 0])

    def test_select_action_explore_cardinality(self):
        agent = HyperDQN([6], gamma=0.5)
        rng = np.random.default_rng(1)
        for _ in range(50):
            a = agent.select_action(np.zeros(6), 3, epsilon=1.0, rng=rng)
            assert a.sum() == 3

    def test_target_error_hand_example(self):
        # zero nets, gamma 0: error is the cost vector masked to uncached files
        agent = HyperDQN([4], gamma=0.0)
        for net in agent.nets + agent.targets:
            for k in range(net.n_layers):
                net.weights[k][:] = 0.0
                net.biases[k][:] = 0.0
        exp = Experience(
            np.zeros(4),
            np.array([1, 0, 0, 1], dtype=np.int8),
            np.array([9.0, 7.0, 5.0, 3.0]),
            np.zeros(4),
        )
        np.testing.assert_allclose(agent.target_error(exp), [0.0, 7.0, 5.0, 0.0])

    def test_train_batch_empty_buffer_noop(self):
        agent = HyperDQN([4], gamma=0.5)
        assert not agent.train_batch(ReplayBuffer(4), 2, 0.1, np.random.default_rng(0))
        assert agent.train_count == 0

    def test_single_item_descent(self):
        # repeated steps on one fixed experience drive its masked loss down
        rng = np.random.default_rng(6)
        agent = HyperDQN([3, 3], gamma=0.0, rng=rng)
        buf = ReplayBuffer(1)
        a = np.array([1, 0, 0, 0, 1, 0], dtype=np.int8)
        exp = Experience(rng.normal(size=6), a, rng.normal(size=6), rng.normal(size=6))
        buf.push(exp)
        before = agent.batch_loss([exp])
        for _ in range(100):
            agent.train_batch(buf, 1, 0.05, rng)
        assert agent.batch_loss([exp]) < before * 0.01

    def test_sync_period(self):
        rng = np.random.default_rng(7)
        agent = HyperDQN([4], gamma=0.3, sync_every=3, rng=rng)
        buf = ReplayBuffer(8)
        for _ in range(8):
            buf.push(make_exp(rng=rng))
        synced_at = []
        for step in range(1, 10):
            agent.train_batch(buf, 4, 0.01, rng)
            if agent.maybe_sync_target():
                synced_at.append(step)
        assert synced_at == [3, 6, 9]

    def test_sync_copies_online_params(self):
        rng = np.random.default_rng(8)
        agent = HyperDQN([4], gamma=0.3, sync_every=1, rng=rng)
        buf = ReplayBuffer(4)
        buf.push(make_exp(rng=rng))
        agent.train_batch(buf, 1, 0.1, rng)
        assert not np.array_equal(agent.nets[0].flat_params(), agent.targets[0].flat_params())
        agent.maybe_sync_target()
        np.testing.assert_array_equal(agent.nets[0].flat_params(), agent.targets[0].flat_params())

    def test_learns_cost_ranking(self):
        # stationary synthetic task: per-file cost is a fixed monotone map of
        # the state entry; after training, predictions rank files like costs
        rng = np.random.default_rng(42)
        f = 8
        agent = HyperDQN([4, 4], gamma=0.0, sync_every=10, hidden_factor=4, rng=rng)
        buf = ReplayBuffer(500)
        true_costs = np.linspace(1.0, 8.0, f)
        for _ in range(500):
            s = rng.uniform(0.0, 1.0, size=f)
            a = np.zeros(f, dtype=np.int8)
            a[rng.choice(f, size=2, replace=False)] = 1
            buf.push(Experience(s, a, true_costs + 0.05 * rng.normal(size=f), s))
        for _ in range(2000):
            agent.train_batch(buf, 32, 0.05, rng)
            agent.maybe_sync_target()
        pred = agent.predict_costs(np.full(f, 0.5))
        rho = spearmanr(pred, true_costs).statistic
        assert rho >= 0.9

    def test_save_load_roundtrip(self, tmp_path):
        rng = np.random.default_rng(9)
        agent = HyperDQN([3, 2], gamma=0.4, sync_every=7, rng=rng)
        buf = ReplayBuffer(4)
        buf.push(make_exp(f=5, rng=rng))
        agent.train_batch(buf, 1, 0.1, rng)
        agent.save(str(tmp_path / "agent"))
        back = HyperDQN.load(str(tmp_path / "agent"))
        assert back.partition == agent.partition
        assert back.train_count == agent.train_count
        s = rng.normal(size=5)
        np.testing.assert_array_equal(back.predict_costs(s), agent.predict_costs(s))
        np.testing.assert_array_equal(
            back.predict_costs(s, use_target=True), agent.predict_costs(s, use_target=True)
        )


class TestEpsilonAnneal:
    def test_linear_ramp_then_floor(self):
        assert epsilon_anneal(0, 100, 1.0, 0.1, 0.5) == 1.0
        assert epsilon_anneal(25, 100, 1.0, 0.1, 0.5) == pytest.approx(0.55)
        assert epsilon_anneal(50, 100, 1.0, 0.1, 0.5) == 0.1
        assert epsilon_anneal(99, 100, 1.0, 0.1, 0.5) == 0.1

    def test_short_ramp_clamps(self):
        assert epsilon_anneal(0, 2, 1.0, 0.05, 0.1) == 1.0
        assert epsilon_anneal(1, 2, 1.0, 0.05, 0.1) == 0.05
