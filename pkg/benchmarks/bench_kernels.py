"""Time the jit kernels against the pure-numpy fallback.

Run with no arguments to get the comparison table; each mode runs in its
own subprocess so the fallback flag is read at import time, the way real
deployments see it. Warmup calls keep jit compilation out of the numbers.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --slots 50000 --repeats 5
"""

import argparse
import json
import os
import subprocess
import sys
import time


def workloads(slots: int):
    import numpy as np

    from cacherl import rng as streams
    from cacherl._kernels import chain_path
    from cacherl.config import load_config, preset_path
    from cacherl.linear_q import StepSizes, run_linear_q
    from cacherl.network import baseline_costs, simulate_leaves
    from cacherl.tabular_q import run_q_learning
    from cacherl.trajectories import EpsilonSchedule, LearningSchedule

    cfg = load_config(preset_path("s1"))
    g, l = cfg.single.build_chains(cfg.chain_seed)
    sched = LearningSchedule(0.8, EpsilonSchedule("constant", 0.1))
    eps = EpsilonSchedule("constant", 0.1)
    net = load_config(preset_path("network_n10")).network
    leaf_chains = net.build_leaf_chains(13)
    intervals = max(1, slots // 100)

    def bench_tabular():
        run_q_learning(g, l, 2, cfg.single.lambdas, 0.9, sched, slots, 3)

    def bench_linear():
        run_linear_q(g, l, 2, cfg.single.lambdas, 0.9,
                     StepSizes(0.005, 0.005, 0.005), eps, slots, 3)

    def bench_leaves():
        phase = simulate_leaves(
            leaf_chains, net.weights, net.leaf_cache, net.rho,
            intervals, net.slots_per_interval, net.requests_per_slot, 0,
        )
        baseline_costs(phase, "lru", net.parent_cache)

    def bench_chain_path():
        u = streams.stream(0, 99).uniform(size=slots * 20)
        out = np.empty(len(u), dtype=np.int64)
        chain_path(g.cumulative_rows(), 0, u, out)

    return [
        (f"tabular q, {slots} slots", bench_tabular),
        (f"linear q, {slots} slots", bench_linear),
        (f"leaf phase, {intervals} intervals x {net.leaves} leaves", bench_leaves),
        (f"chain path, {slots * 20} steps", bench_chain_path),
    ]


def run_mode(slots: int, repeats: int) -> None:
    from cacherl._kernels import NUMBA_ACTIVE

    results = {}
    for name, fn in workloads(slots):
        fn()  # warmup: jit compile + allocator
        best = min(timed(fn) for _ in range(repeats))
        results[name] = best
    json.dump({"numba": NUMBA_ACTIVE, "times": results}, sys.stdout)


def timed(fn) -> float:
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--slots", type=int, default=20000)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--mode", choices=["fast", "fallback"], help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.mode:
        run_mode(args.slots, args.repeats)
        return 0

    reports = {}
    for mode in ("fast", "fallback"):
        env = dict(os.environ)
        if mode == "fallback":
            env["CACHERL_NO_NUMBA"] = "1"
        else:
            env.pop("CACHERL_NO_NUMBA", None)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__),
             "--mode", mode, "--slots", str(args.slots), "--repeats", str(args.repeats)],
            capture_output=True, text=True, env=env,
        )
        if proc.returncode != 0:
            sys.stderr.write(proc.stderr)
            return 1
        reports[mode] = json.loads(proc.stdout)

    if reports["fast"]["numba"] == reports["fallback"]["numba"]:
        sys.stderr.write("warning: both subprocesses ran the same code path\n")

    width = max(len(k) for k in reports["fast"]["times"])
    print(f"{'workload':<{width}}  {'jit':>10}  {'numpy':>10}  {'speedup':>8}")
    for name, fast in reports["fast"]["times"].items():
        slow = reports["fallback"]["times"][name]
        print(f"{name:<{width}}  {fast:>9.4f}s  {slow:>9.4f}s  {slow / fast:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
