"""Experiment runner: validated configs in, CSV and JSON records out.

Each run directory gets:

  config.json   normalized config echo plus its hash
  seed_<s>.csv  per-seed trace, schema step,cost,run_mean[,extra...]
  mean.csv      cross-seed mean of every non-step column
  summary.json  per-seed and cross-seed scalar summaries

Numbers are written with 17 significant digits and LF line endings, so a
(config, seed) pair reproduces the same bytes on every run. Seeds fan out
across worker threads; files are written afterwards in seed order, so the
thread count never changes the output.

Trace columns by scenario:
  single-node-*       cost = the learner (or the solved policy for the
                      oracle scenario); optional oracle column replays the
                      solved policy on the same seed's trajectory.
  network-dqn         cost = the agent; one column per configured baseline
                      arm; reduced = nocache - cost.
  network-baselines   cost = the no-cache reference; one column per
                      configured baseline arm.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng as streams
from .config import ExperimentConfig, NetworkConfig, SingleNodeConfig
from .dqn import Experience, HyperDQN, ReplayBuffer, epsilon_anneal, even_partition
from .linear_q import StepSizes, run_linear_q
from .mdp import build_mdp, policy_iteration, simulate_policy
from .network import (
    LeafPhase,
    baseline_costs,
    file_cost_vector,
    nocache_costs,
    noncausal_costs,
    simulate_leaves,
)
from .tabular_q import run_q_learning
from .trajectories import running_mean


def format_float(x: float) -> str:
    return f"{float(x):.17g}"


def write_csv(path: str, header: list[str], columns: list[np.ndarray]) -> None:
    """Write aligned columns; integer columns as ints, floats at full precision."""
    if len(header) != len(columns):
        raise ValueError("header and columns disagree")
    cols = [np.asarray(c) for c in columns]
    n = cols[0].shape[0] if cols else 0
    for c in cols:
        if c.shape[0] != n:
            raise ValueError("csv columns must share one length")
    ints = [np.issubdtype(c.dtype, np.integer) for c in cols]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            fields = [
                str(int(c[i])) if isint else format_float(c[i])
                for c, isint in zip(cols, ints)
            ]
            fh.write(",".join(fields) + "\n")


def read_csv(path: str) -> dict[str, np.ndarray]:
    """Read a trace written by write_csv; every column comes back as float."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        rows = [row for row in reader if row]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"{path}: row width does not match header")
    data = np.array(rows, dtype=np.float64) if rows else np.empty((0, len(header)))
    return {name: data[:, j] for j, name in enumerate(header)}


@dataclass
class RunRecord:
    """One seed's trace plus scalar summaries."""

    seed: int
    columns: dict[str, np.ndarray]
    summary: dict
    csv_path: str | None = None


def _summarize(columns: dict[str, np.ndarray]) -> dict:
    out = {}
    for name, col in columns.items():
        arr = np.asarray(col, dtype=np.float64)
        if name == "step" or arr.size == 0:
            continue
        out[f"{name}_mean"] = float(arr.mean())
    rm = columns.get("run_mean")
    if rm is not None and len(rm):
        out["final_run_mean"] = float(rm[-1])
    return out


def _single_seed_columns(
    cfg: SingleNodeConfig,
    scenario: str,
    g_chain,
    l_chain,
    oracle_policy: np.ndarray | None,
    seed: int,
) -> dict[str, np.ndarray]:
    t = cfg.slots
    if scenario == "single-node-tabular":
        _, costs = run_q_learning(
            g_chain,
            l_chain,
            cfg.cache_size,
            cfg.lambdas,
            cfg.gamma,
            cfg.tabular.schedule,
            t,
            seed,
            cfg.observe,
            cfg.requests_per_slot,
        )
    elif scenario == "single-node-linear":
        steps = StepSizes(cfg.linear.alpha_g, cfg.linear.alpha_l, cfg.linear.alpha_r)
        _, costs = run_linear_q(
            g_chain,
            l_chain,
            cfg.cache_size,
            cfg.lambdas,
            cfg.gamma,
            steps,
            cfg.linear.epsilon,
            t,
            seed,
            cfg.observe,
            cfg.requests_per_slot,
        )
    else:
        costs = simulate_policy(
            g_chain,
            l_chain,
            cfg.cache_size,
            cfg.lambdas,
            oracle_policy,
            t,
            seed,
            cfg.observe,
            cfg.requests_per_slot,
        )
    columns = {
        "step": np.arange(t, dtype=np.int64),
        "cost": costs,
        "run_mean": running_mean(costs),
    }
    if oracle_policy is not None and scenario != "single-node-oracle":
        columns["oracle"] = simulate_policy(
            g_chain,
            l_chain,
            cfg.cache_size,
            cfg.lambdas,
            oracle_policy,
            t,
            seed,
            cfg.observe,
            cfg.requests_per_slot,
        )
    return columns


def run_dqn_arm(net: NetworkConfig, phase: LeafPhase, seed: int) -> tuple[np.ndarray, HyperDQN]:
    """Interval loop: observe the aggregate state, act, store, train.

    Stream use per seed: INIT seeds the net weights, AGENT the
    exploration draws, REPLAY the batch sampling. The leaf phase is fixed
    in advance, so the parent's choices never feed back into the leaves.

    The first interval has no prior observation: the action is taken from
    the zero state (uniformly random at the default initial epsilon of 1)
    and no experience is stored for it.
    """
    spec = net.dqn
    scale = 1.0
    if spec.cost_scale == "requests":
        scale = 1.0 / (net.requests_per_slot * net.slots_per_interval)
    agent = HyperDQN(
        even_partition(net.files, spec.groups),
        net.gamma,
        sync_every=spec.sync,
        head=spec.head,
        hidden_factor=spec.hidden_factor,
        rng=streams.stream(seed, streams.INIT),
    )
    buffer = ReplayBuffer(spec.replay)
    act_rng = streams.stream(seed, streams.AGENT)
    rep_rng = streams.stream(seed, streams.REPLAY)
    n_i = phase.n_intervals
    s_scaled = phase.s0 * scale
    costs = np.empty(n_i)
    s_prev = np.zeros(net.files)
    for tau in range(n_i):
        eps = epsilon_anneal(tau, n_i, spec.eps_start, spec.eps_floor, spec.eps_frac)
        a0 = agent.select_action(s_prev, net.parent_cache, eps, act_rng)
        costs[tau] = (2.0 * phase.w1[tau].sum() - phase.w1[tau] @ a0) / phase.slots_per_interval
        if tau > 0:
            c_vec = file_cost_vector(phase, tau, a0) * scale
            buffer.push(Experience(s_prev, a0, c_vec, s_scaled[tau]))
            if agent.train_batch(buffer, spec.batch, spec.lr, rep_rng):
                agent.maybe_sync_target()
        s_prev = s_scaled[tau]
    return costs, agent


def _network_seed_columns(
    net: NetworkConfig,
    scenario: str,
    leaf_chains,
    seed: int,
) -> dict[str, np.ndarray]:
    phase = simulate_leaves(
        leaf_chains,
        net.weight_vector(),
        net.leaf_cache,
        net.rho,
        net.intervals,
        net.slots_per_interval,
        net.requests_per_slot,
        seed,
    )
    arms: dict[str, np.ndarray] = {}
    for name in net.baselines:
        if name == "nocache":
            arms[name] = nocache_costs(phase)
        elif name == "noncausal":
            arms[name] = noncausal_costs(phase, net.parent_cache)[0]
        else:
            arms[name] = baseline_costs(phase, name, net.parent_cache)
    if scenario == "network-dqn":
        cost = run_dqn_arm(net, phase, seed)[0]
    else:
        cost = nocache_costs(phase)
    columns = {
        "step": np.arange(net.intervals, dtype=np.int64),
        "cost": cost,
        "run_mean": running_mean(cost),
    }
    columns.update(arms)
    if scenario == "network-dqn":
        reference = arms.get("nocache")
        if reference is None:
            reference = nocache_costs(phase)
        columns["reduced"] = reference - cost
    return columns


def run_experiment(
    config: ExperimentConfig,
    out_dir: str | None = None,
    threads: int = 1,
    seed_override: list[int] | None = None,
) -> list[RunRecord]:
    """Run every seed, optionally writing the run directory.

    Records come back in seed-list order regardless of thread count.
    Exceptions from a seed's run are re-raised tagged with that seed.
    """
    seeds = list(seed_override) if seed_override else list(config.seeds)
    scenario = config.scenario
    if scenario.startswith("single-node"):
        cfg = config.single
        g_chain, l_chain = cfg.build_chains(config.chain_seed)
        oracle_policy = None
        if scenario == "single-node-oracle" or cfg.include_oracle:
            mdp = build_mdp(g_chain, l_chain, cfg.cache_size, cfg.lambdas, cfg.gamma)
            oracle_policy = policy_iteration(mdp).policy

        def worker(seed: int) -> dict[str, np.ndarray]:
            return _single_seed_columns(cfg, scenario, g_chain, l_chain, oracle_policy, seed)

    else:
        net = config.network
        leaf_chains = net.build_leaf_chains(config.chain_seed)

        def worker(seed: int) -> dict[str, np.ndarray]:
            return _network_seed_columns(net, scenario, leaf_chains, seed)

    def run_one(seed: int) -> dict[str, np.ndarray]:
        try:
            return worker(seed)
        except Exception as exc:
            raise RuntimeError(f"seed {seed}: {exc}") from exc

    if threads > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            all_columns = list(pool.map(run_one, seeds))
    else:
        all_columns = [run_one(s) for s in seeds]
    records = [RunRecord(seed, cols, _summarize(cols)) for seed, cols in zip(seeds, all_columns)]
    if out_dir is not None:
        write_records(config, records, out_dir)
    return records


def write_records(config: ExperimentConfig, records: list[RunRecord], out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for rec in records:
        rec.csv_path = os.path.join(out_dir, f"seed_{rec.seed}.csv")
        write_csv(rec.csv_path, list(rec.columns), list(rec.columns.values()))
    if records:
        names = list(records[0].columns)
        mean_cols = []
        for name in names:
            if name == "step":
                mean_cols.append(records[0].columns["step"])
            else:
                mean_cols.append(np.mean([r.columns[name] for r in records], axis=0))
        write_csv(os.path.join(out_dir, "mean.csv"), names, mean_cols)
    _write_json(
        os.path.join(out_dir, "config.json"),
        {
            "scenario": config.scenario,
            "config_hash": config.hash(),
            "config": config.normalized,
            "seeds": [r.seed for r in records],
        },
    )
    summary = {
        "scenario": config.scenario,
        "config_hash": config.hash(),
        "per_seed": {str(r.seed): r.summary for r in records},
    }
    if records:
        summary["mean"] = {
            key: float(np.mean([r.summary[key] for r in records]))
            for key in records[0].summary
        }
    _write_json(os.path.join(out_dir, "summary.json"), summary)


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def compare_policies(
    costs_by_policy: dict[str, np.ndarray],
    reference: str = "nocache",
    n_samples: int = 100,
    seed: int = 0,
) -> tuple[dict, dict[str, np.ndarray]]:
    """Cross-policy summary plus reduced-cost CDF samples.

    reduced(policy) = reference cost - policy cost per step. Samples for
    every policy are taken at one shared set of random step indices, so
    the resulting CDFs are over the same steps.
    """
    if reference not in costs_by_policy:
        raise ValueError(f"reference policy {reference!r} missing from inputs")
    arrays = {p: np.asarray(c, dtype=np.float64).ravel() for p, c in costs_by_policy.items()}
    n = len(arrays[reference])
    if n == 0:
        raise ValueError("empty cost traces")
    for p, c in arrays.items():
        if len(c) != n:
            raise ValueError(f"policy {p!r} has {len(c)} steps, expected {n}")
    ref = arrays[reference]
    idx = streams.stream(seed, streams.COMPARE).integers(n, size=n_samples)
    summary: dict = {"reference": reference, "steps": n, "policies": {}}
    samples: dict[str, np.ndarray] = {}
    for p, c in arrays.items():
        reduced = ref - c
        summary["policies"][p] = {
            "mean_cost": float(c.mean()),
            "mean_reduced": float(reduced.mean()),
        }
        if p != reference:
            samples[p] = reduced[idx]
    return summary, samples


def write_comparison(out_dir: str, summary: dict, samples: dict[str, np.ndarray]) -> None:
    """compare_summary.json plus compare_cdf.csv (policy,sample rows)."""
    os.makedirs(out_dir, exist_ok=True)
    _write_json(os.path.join(out_dir, "compare_summary.json"), summary)
    path = os.path.join(out_dir, "compare_cdf.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("policy,sample\n")
        for p, arr in samples.items():
            for v in arr:
                fh.write(f"{p},{format_float(v)}\n")
