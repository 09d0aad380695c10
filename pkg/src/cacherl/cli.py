"""Command line front end.

Verbs:
  run       execute an experiment config over all its seeds
  compare   cross-policy summary and reduced-cost CDF samples from traces
  oracle    solve the exact single-node model and dump values and policy
  validate  parse and check a config without running anything

Exit codes: 0 success, 2 bad config or bad inputs, 3 runtime failure.
Output directory resolution: --out-dir if given, else $CACHERL_OUT_DIR,
else ./runs; the run verb appends the config file's stem when it falls
back to a shared base directory.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import ConfigError, list_presets, load_config, preset_path
from .harness import (
    _write_json,
    compare_policies,
    read_csv,
    run_experiment,
    write_comparison,
)

OUT_DIR_ENV = "CACHERL_OUT_DIR"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cacherl", description="caching-policy experiment runner")
    sub = parser.add_subparsers(dest="verb", required=True)

    run_p = sub.add_parser("run", help="run an experiment config")
    run_p.add_argument("config")
    run_p.add_argument(
        "--seed-override",
        type=int,
        nargs="+",
        default=None,
        metavar="SEED",
        help="run these seeds instead of the config's list",
    )
    run_p.add_argument("--out-dir", default=None)
    run_p.add_argument("--threads", type=int, default=1)

    cmp_p = sub.add_parser("compare", help="compare policy cost traces")
    cmp_p.add_argument(
        "records",
        nargs="+",
        metavar="LABEL=CSV",
        help="policy traces; a single wide CSV compares its per-policy columns",
    )
    cmp_p.add_argument("--reference", default="nocache")
    cmp_p.add_argument("--samples", type=int, default=100)
    cmp_p.add_argument("--seed", type=int, default=0)
    cmp_p.add_argument("--out-dir", default=None)

    orc_p = sub.add_parser("oracle", help="solve the exact model for a config")
    orc_p.add_argument("config")
    orc_p.add_argument("--out-dir", default=None)

    val_p = sub.add_parser("validate", help="validate a config")
    val_p.add_argument("config")
    return parser


def _resolve_out_dir(arg: str | None, default_leaf: str | None = None) -> str:
    if arg:
        return arg
    base = os.environ.get(OUT_DIR_ENV, "runs")
    if default_leaf:
        return os.path.join(base, default_leaf)
    return base


def _config_stem(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def _resolve_config(arg: str) -> str:
    """Config argument: a file path, or the name of a shipped preset."""
    if os.path.exists(arg) or os.sep in arg:
        return arg
    try:
        return preset_path(os.path.splitext(arg)[0])
    except ConfigError:
        raise ConfigError(
            f"no config file {arg!r} and no such preset (presets: {', '.join(list_presets())})"
        ) from None


def _gather_compare_inputs(records: list[str]):
    """Map record arguments to {policy: cost trace}.

    Each argument is label=path or a bare path (label = file stem). A
    single wide CSV instead contributes every non-bookkeeping column,
    with its cost column under the label "cost".
    """
    skip = {"step", "run_mean", "reduced"}
    parsed = []
    for rec in records:
        label, sep, path = rec.partition("=")
        if not sep:
            label, path = _config_stem(rec), rec
        parsed.append((label, path))
    if len(parsed) == 1:
        cols = read_csv(parsed[0][1])
        if any(c not in skip and c != "cost" for c in cols):
            return {name: arr for name, arr in cols.items() if name not in skip}
    out = {}
    for label, path in parsed:
        cols = read_csv(path)
        if "cost" not in cols:
            raise ValueError(f"{path}: no cost column")
        if label in out:
            raise ValueError(f"duplicate policy label {label!r}")
        out[label] = cols["cost"]
    return out


def _cmd_run(args) -> int:
    path = _resolve_config(args.config)
    cfg = load_config(path)
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    out_dir = _resolve_out_dir(args.out_dir, _config_stem(path))
    records = run_experiment(cfg, out_dir, threads=args.threads, seed_override=args.seed_override)
    for rec in records:
        mean = rec.summary.get("cost_mean")
        shown = "n/a" if mean is None else f"{mean:.6g}"
        print(f"seed {rec.seed}: mean cost {shown}")
    print(f"wrote {len(records)} trace(s) to {out_dir}")
    return 0


def _cmd_compare(args) -> int:
    costs = _gather_compare_inputs(args.records)
    summary, samples = compare_policies(
        costs, reference=args.reference, n_samples=args.samples, seed=args.seed
    )
    out_dir = _resolve_out_dir(args.out_dir)
    write_comparison(out_dir, summary, samples)
    for policy, stats in summary["policies"].items():
        print(f"{policy}: mean cost {stats['mean_cost']:.6g}, mean reduced {stats['mean_reduced']:.6g}")
    print(f"wrote comparison to {out_dir}")
    return 0


def _cmd_oracle(args) -> int:
    from .mdp import bellman_residual, build_mdp, policy_iteration

    path = _resolve_config(args.config)
    cfg = load_config(path)
    if cfg.single is None:
        raise ConfigError("oracle verb needs a single-node scenario")
    sn = cfg.single
    g_chain, l_chain = sn.build_chains(cfg.chain_seed)
    mdp = build_mdp(g_chain, l_chain, sn.cache_size, sn.lambdas, sn.gamma)
    table = policy_iteration(mdp)
    residual = bellman_residual(mdp, table.values)
    out_dir = _resolve_out_dir(args.out_dir, _config_stem(path))
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "oracle.json")
    _write_json(
        path,
        {
            "config_hash": cfg.hash(),
            "bellman_residual": float(residual),
            "gamma": sn.gamma,
            "values": [float(v) for v in table.values],
            "policy": [int(p) for p in table.policy],
        },
    )
    print(f"wrote {path} (bellman residual {residual:.3e})")
    return 0


def _cmd_validate(args) -> int:
    cfg = load_config(_resolve_config(args.config))
    print(f"ok: scenario={cfg.scenario} seeds={len(cfg.seeds)} hash={cfg.hash()}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "compare": _cmd_compare,
        "oracle": _cmd_oracle,
        "validate": _cmd_validate,
    }
    try:
        return handlers[args.verb](args)
    except (ConfigError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # anything past validation is a runtime failure
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
