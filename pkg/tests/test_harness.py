import json
import os

import numpy as np
import pytest

from cacherl.config import validate_config
from cacherl.harness import (
    compare_policies,
    format_float,
    read_csv,
    run_experiment,
    write_comparison,
    write_csv,
    write_records,
)


def tabular_config(**overrides):
    raw = {
        "scenario": "single-node-tabular",
        "seeds": [0, 1],
        "chain_seed": 7,
        "files": 6,
        "cache_size": 2,
        "lambdas": [10, 600, 1000],
        "slots": 10,
        "include_oracle": True,
        "global_chain": {"states": 2, "etas": [1.0, 1.5], "orderings": "random"},
        "local_chain": {"states": 2, "etas": [0.7, 2.5], "orderings": "random"},
    }
    raw.update(overrides)
    return validate_config(raw)


def network_config(**overrides):
    raw = {
        "scenario": "network-dqn",
        "seeds": [0],
        "chain_seed": 3,
        "files": 12,
        "leaves": 2,
        "leaf_cache": 1,
        "parent_cache": 3,
        "intervals": 20,
        "slots_per_interval": 2,
        "requests_per_slot": 5,
        "dqn": {"groups": 3, "batch": 8, "sync": 5, "replay": 50},
    }
    raw.update(overrides)
    return validate_config(raw)


class TestCsvFormat:
    def test_float_formatting_full_precision(self):
        assert format_float(1.0 / 3.0) == "0.33333333333333331"
        assert format_float(2.0) == "2"

    def test_write_read_roundtrip(self, tmp_path):
        path = str(tmp_path / "t.csv")
        step = np.arange(4, dtype=np.int64)
        cost = np.array([0.1, 0.2, 1 / 3, 4.0])
        write_csv(path, ["step", "cost"], [step, cost])
        back = read_csv(path)
        np.testing.assert_array_equal(back["step"], step.astype(np.float64))
        np.testing.assert_array_equal(back["cost"], cost)

    def test_lf_line_endings_and_header(self, tmp_path):
        path = str(tmp_path / "t.csv")
        write_csv(path, ["step", "cost"], [np.array([0]), np.array([0.5])])
        raw = open(path, "rb").read()
        assert raw == b"step,cost\n0,0.5\n"

    def test_misaligned_columns_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_csv(str(tmp_path / "x.csv"), ["a", "b"], [np.zeros(2)])
        with pytest.raises(ValueError):
            write_csv(str(tmp_path / "y.csv"), ["a", "b"], [np.zeros(2), np.zeros(3)])

    def test_read_rejects_ragged_rows(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n3\n", encoding="utf-8")
        with pytest.raises(ValueError, match="row width"):
            read_csv(str(path))

    def test_read_rejects_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(ValueError, match="empty"):
            read_csv(str(path))


class TestSingleNodeRuns:
    def test_columns_and_shapes(self):
        records = run_experiment(tabular_config())
        assert [r.seed for r in records] == [0, 1]
        cols = records[0].columns
        assert list(cols) == ["step", "cost", "run_mean", "oracle"]
        assert all(len(v) == 10 for v in cols.values())
        np.testing.assert_allclose(cols["run_mean"], np.cumsum(cols["cost"]) / np.arange(1, 11))

    def test_oracle_column_optional(self):
        records = run_experiment(tabular_config(include_oracle=False))
        assert "oracle" not in records[0].columns

    def test_oracle_scenario_replays_solved_policy(self):
        records = run_experiment(
            validate_config(
                {
                    "scenario": "single-node-oracle",
                    "seeds": [0],
                    "chain_seed": 7,
                    "files": 6,
                    "cache_size": 2,
                    "lambdas": [10, 600, 1000],
                    "slots": 50,
                    "global_chain": {"states": 2, "etas": [1.0, 1.5], "orderings": "random"},
                    "local_chain": {"states": 2, "etas": [0.7, 2.5], "orderings": "random"},
                }
            )
        )
        assert list(records[0].columns) == ["step", "cost", "run_mean"]

    def test_summary_scalars(self):
        rec = run_experiment(tabular_config())[0]
        assert rec.summary["cost_mean"] == pytest.approx(rec.columns["cost"].mean())
        assert rec.summary["final_run_mean"] == pytest.approx(rec.columns["run_mean"][-1])

    def test_thread_count_invariant(self):
        cfg = tabular_config(seeds=[0, 1, 2, 3])
        one = run_experiment(cfg, threads=1)
        four = run_experiment(cfg, threads=4)
        for a, b in zip(one, four):
            assert a.seed == b.seed
            for name in a.columns:
                np.testing.assert_array_equal(a.columns[name], b.columns[name])

    def test_seed_override(self):
        records = run_experiment(tabular_config(), seed_override=[5])
        assert [r.seed for r in records] == [5]

    def test_failure_tagged_with_seed(self, monkeypatch):
        import cacherl.harness as hmod

        def boom(*args, **kwargs):
            raise ValueError("inner")

        monkeypatch.setattr(hmod, "run_q_learning", boom)
        with pytest.raises(RuntimeError, match="seed 0: inner"):
            run_experiment(tabular_config(seeds=[0]))


class TestNetworkRuns:
    def test_dqn_columns(self):
        rec = run_experiment(network_config())[0]
        assert list(rec.columns) == [
            "step",
            "cost",
            "run_mean",
            "lru",
            "lfu",
            "fifo",
            "noncausal",
            "nocache",
            "reduced",
        ]
        np.testing.assert_allclose(rec.columns["reduced"], rec.columns["nocache"] - rec.columns["cost"])
        assert np.all(rec.columns["noncausal"] <= rec.columns["nocache"] + 1e-12)

    def test_baselines_scenario_reference_cost(self):
        raw = {
            "scenario": "network-baselines",
            "seeds": [0],
            "chain_seed": 3,
            "files": 12,
            "leaves": 2,
            "leaf_cache": 1,
            "parent_cache": 3,
            "intervals": 20,
            "slots_per_interval": 2,
            "requests_per_slot": 5,
            "baselines": ["lru", "nocache"],
        }
        rec = run_experiment(validate_config(raw))[0]
        assert list(rec.columns) == ["step", "cost", "run_mean", "lru", "nocache"]
        np.testing.assert_array_equal(rec.columns["cost"], rec.columns["nocache"])

    def test_deterministic_per_seed(self):
        a = run_experiment(network_config())[0]
        b = run_experiment(network_config())[0]
        for name in a.columns:
            np.testing.assert_array_equal(a.columns[name], b.columns[name])


class TestRunDirectory:
    def test_files_written(self, tmp_path):
        cfg = tabular_config()
        out = str(tmp_path / "run")
        records = run_experiment(cfg, out_dir=out)
        assert sorted(os.listdir(out)) == [
            "config.json",
            "mean.csv",
            "seed_0.csv",
            "seed_1.csv",
            "summary.json",
        ]
        assert records[0].csv_path == os.path.join(out, "seed_0.csv")
        meta = json.load(open(os.path.join(out, "config.json")))
        assert meta["config_hash"] == cfg.hash()
        assert meta["seeds"] == [0, 1]
        summary = json.load(open(os.path.join(out, "summary.json")))
        assert set(summary["per_seed"]) == {"0", "1"}
        assert "cost_mean" in summary["mean"]

    def test_mean_csv_is_cross_seed_average(self, tmp_path):
        out = str(tmp_path / "run")
        records = run_experiment(tabular_config(), out_dir=out)
        mean = read_csv(os.path.join(out, "mean.csv"))
        want = np.mean([r.columns["cost"] for r in records], axis=0)
        np.testing.assert_allclose(mean["cost"], want)

    def test_byte_identical_rewrites(self, tmp_path):
        cfg = tabular_config()
        out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
        run_experiment(cfg, out_dir=out1)
        run_experiment(cfg, out_dir=out2, threads=3)
        for name in ("seed_0.csv", "seed_1.csv", "mean.csv"):
            a = open(os.path.join(out1, name), "rb").read()
            b = open(os.path.join(out2, name), "rb").read()
            assert a == b

    def test_write_records_accepts_empty(self, tmp_path):
        out = str(tmp_path / "empty")
        write_records(tabular_config(), [], out)
        assert os.path.exists(os.path.join(out, "config.json"))


class TestComparePolicies:
    def traces(self):
        rng = np.random.default_rng(0)
        base = rng.uniform(5, 10, size=200)
        return {
            "nocache": base,
            "agent": base - 2.0,
            "lru": base - 1.0,
        }

    def test_summary_means(self):
        summary, samples = compare_policies(self.traces(), n_samples=50)
        assert summary["reference"] == "nocache"
        assert summary["policies"]["agent"]["mean_reduced"] == pytest.approx(2.0)
        assert summary["policies"]["nocache"]["mean_reduced"] == 0.0
        assert set(samples) == {"agent", "lru"}
        assert all(len(v) == 50 for v in samples.values())

    def test_shared_sample_indices(self):
        _, samples = compare_policies(self.traces(), n_samples=500, seed=3)
        # constant offsets stay constant across the shared step draw
        np.testing.assert_allclose(samples["agent"], 2.0)
        np.testing.assert_allclose(samples["lru"], 1.0)

    def test_reference_must_exist(self):
        with pytest.raises(ValueError, match="reference"):
            compare_policies({"a": np.ones(3)}, reference="nocache")

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="steps"):
            compare_policies({"nocache": np.ones(3), "a": np.ones(4)})

    def test_write_comparison_files(self, tmp_path):
        summary, samples = compare_policies(self.traces(), n_samples=10)
        write_comparison(str(tmp_path), summary, samples)
        raw = open(tmp_path / "compare_cdf.csv", encoding="utf-8").read()
        lines = raw.strip().split("\n")
        assert lines[0] == "policy,sample"
        assert len(lines) == 1 + 2 * 10
        assert json.load(open(tmp_path / "compare_summary.json"))["reference"] == "nocache"
