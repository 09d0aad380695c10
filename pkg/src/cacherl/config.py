"""Experiment configuration: YAML in, validated dataclasses out.

Configs are flat documents with per-module sections. Validation is
strict: unknown keys are rejected with their full field path, so a typo
never silently falls back to a default.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import rng as streams
from .popularity import PopularityChain, random_chain, with_stickiness, zipf_chain
from .trajectories import EpsilonSchedule, LearningSchedule

SCENARIOS = (
    "single-node-tabular",
    "single-node-linear",
    "single-node-oracle",
    "network-dqn",
    "network-baselines",
)

# chain-construction channels, distinct from the per-run trajectory ones
BUILD_GLOBAL = 50
BUILD_LOCAL = 51
BUILD_LEAF_BASE = 1000


class ConfigError(ValueError):
    """Invalid configuration; message carries the offending field path."""


def _require(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"{path}: {message}")


def _check_keys(d: dict, allowed: set[str], path: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        name = sorted(unknown)[0]
        where = f"{path}.{name}" if path else name
        raise ConfigError(f"{where}: unknown key")


def _get(d: dict, key: str, default, path: str, types, check=None, msg: str = "invalid value"):
    val = d.get(key, default)
    where = f"{path}.{key}" if path else key
    if val is None:
        raise ConfigError(f"{where}: required")
    if not isinstance(val, types) or isinstance(val, bool) and bool not in (
        types if isinstance(types, tuple) else (types,)
    ):
        raise ConfigError(f"{where}: wrong type")
    if check is not None and not check(val):
        raise ConfigError(f"{where}: {msg}")
    return val


@dataclass(frozen=True)
class ChainSpec:
    states: int
    etas: tuple[float, ...] | None = None
    eta_range: tuple[float, float] | None = None
    orderings: str = "identity"  # rank orderings for fixed etas

    def build(self, n_files: int, rng: np.random.Generator) -> PopularityChain:
        if self.etas is not None:
            return zipf_chain(
                self.states, n_files, list(self.etas), rng, random_orderings=self.orderings == "random"
            )
        assert self.eta_range is not None
        return random_chain(self.states, n_files, self.eta_range, rng)


def _parse_chain(d: dict, path: str) -> ChainSpec:
    _check_keys(d, {"states", "etas", "eta_range", "orderings"}, path)
    states = _get(d, "states", None, path, int, lambda v: v >= 1, "must be >= 1")
    etas = d.get("etas")
    eta_range = d.get("eta_range")
    orderings = _get(d, "orderings", "identity", path, str, lambda v: v in ("identity", "random"))
    _require(
        (etas is None) != (eta_range is None),
        path,
        "give exactly one of etas / eta_range",
    )
    if etas is not None:
        _require(isinstance(etas, list) and len(etas) == states, f"{path}.etas", "need one eta per state")
        _require(all(isinstance(e, (int, float)) and e >= 0 for e in etas), f"{path}.etas", "etas must be >= 0")
        return ChainSpec(states, tuple(float(e) for e in etas), None, orderings)
    _require(
        "orderings" not in d,
        f"{path}.orderings",
        "eta_range chains always use random orderings",
    )
    _require(
        isinstance(eta_range, list) and len(eta_range) == 2 and eta_range[1] > eta_range[0],
        f"{path}.eta_range",
        "must be [lo, hi] with hi > lo",
    )
    return ChainSpec(states, None, (float(eta_range[0]), float(eta_range[1])))


def _parse_epsilon(d: dict, path: str, default_value: float = 0.05) -> EpsilonSchedule:
    if d is None:
        return EpsilonSchedule("constant", default_value)
    _check_keys(d, {"mode", "value", "burn_in", "floor"}, path)
    mode = _get(d, "mode", "constant", path, str, lambda v: v in ("constant", "inverse_time"))
    value = float(_get(d, "value", default_value, path, (int, float), lambda v: 0 <= v <= 1, "must be in [0, 1]"))
    burn_in = _get(d, "burn_in", 0, path, int, lambda v: v >= 0, "must be >= 0")
    floor = float(_get(d, "floor", 0.0, path, (int, float), lambda v: 0 <= v <= 1, "must be in [0, 1]"))
    return EpsilonSchedule(mode, value, burn_in, floor)


@dataclass(frozen=True)
class TabularSpec:
    schedule: LearningSchedule


@dataclass(frozen=True)
class LinearSpec:
    alpha_g: float
    alpha_l: float
    alpha_r: float
    epsilon: EpsilonSchedule


@dataclass(frozen=True)
class SingleNodeConfig:
    files: int
    cache_size: int
    gamma: float
    lambdas: tuple[float, float, float]
    slots: int
    global_chain: ChainSpec
    local_chain: ChainSpec
    observe: str
    requests_per_slot: int
    include_oracle: bool
    tabular: TabularSpec | None = None
    linear: LinearSpec | None = None

    def build_chains(self, chain_seed: int) -> tuple[PopularityChain, PopularityChain]:
        g = self.global_chain.build(self.files, streams.stream(chain_seed, BUILD_GLOBAL))
        l = self.local_chain.build(self.files, streams.stream(chain_seed, BUILD_LOCAL))
        return g, l


@dataclass(frozen=True)
class DQNSpec:
    groups: int
    batch: int
    sync: int
    lr: float
    replay: int
    head: str
    hidden_factor: int
    eps_start: float
    eps_floor: float
    eps_frac: float
    cost_scale: str


@dataclass(frozen=True)
class NetworkConfig:
    files: int
    leaves: int
    leaf_cache: int
    parent_cache: int
    slots_per_interval: int
    intervals: int
    requests_per_slot: int
    leaf_states: int
    leaf_eta_range: tuple[float, float]
    stickiness: float
    rho: float
    gamma: float
    weights: tuple[float, ...] | None  # None = uniform 1/N
    dqn: DQNSpec | None
    baselines: tuple[str, ...]

    def build_leaf_chains(self, chain_seed: int) -> list[PopularityChain]:
        chains = []
        for i in range(self.leaves):
            c = random_chain(
                self.leaf_states,
                self.files,
                self.leaf_eta_range,
                streams.stream(chain_seed, BUILD_LEAF_BASE + i),
            )
            if self.stickiness > 0:
                c = with_stickiness(c, self.stickiness)
            chains.append(c)
        return chains

    def weight_vector(self) -> np.ndarray:
        if self.weights is None:
            return np.full(self.leaves, 1.0 / self.leaves)
        return np.array(self.weights, dtype=np.float64)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    seeds: tuple[int, ...]
    chain_seed: int
    single: SingleNodeConfig | None = None
    network: NetworkConfig | None = None
    normalized: dict = field(default=None, repr=False, compare=False)  # type: ignore[assignment]

    def hash(self) -> str:
        return config_hash(self.normalized)


def config_hash(normalized: dict) -> str:
    payload = json.dumps(normalized, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def _parse_lambdas(raw, path: str) -> tuple[float, float, float]:
    _require(isinstance(raw, list) and len(raw) == 3, path, "must be a list of three weights")
    _require(all(isinstance(x, (int, float)) and x >= 0 for x in raw), path, "weights must be >= 0")
    return float(raw[0]), float(raw[1]), float(raw[2])


def _parse_single(raw: dict, scenario: str) -> SingleNodeConfig:
    allowed = {
        "files",
        "cache_size",
        "gamma",
        "lambdas",
        "slots",
        "global_chain",
        "local_chain",
        "observe",
        "requests_per_slot",
        "include_oracle",
        "tabular",
        "linear",
    }
    _check_keys(raw, allowed, "")
    files = _get(raw, "files", None, "", int, lambda v: v >= 1, "must be >= 1")
    cache_size = _get(raw, "cache_size", None, "", int, lambda v: v >= 0, "must be >= 0")
    _require(cache_size <= files, "cache_size", "must be <= files")
    gamma = float(_get(raw, "gamma", 0.9, "", (int, float), lambda v: 0 <= v < 1, "must be in [0, 1)"))
    lambdas = _parse_lambdas(raw.get("lambdas"), "lambdas")
    slots = _get(raw, "slots", None, "", int, lambda v: v >= 0, "must be >= 0")
    _require(isinstance(raw.get("global_chain"), dict), "global_chain", "required section")
    _require(isinstance(raw.get("local_chain"), dict), "local_chain", "required section")
    global_chain = _parse_chain(raw["global_chain"], "global_chain")
    local_chain = _parse_chain(raw["local_chain"], "local_chain")
    observe = _get(raw, "observe", "exact", "", str, lambda v: v in ("exact", "empirical"))
    requests_per_slot = _get(raw, "requests_per_slot", 100, "", int, lambda v: v >= 0, "must be >= 0")
    include_oracle = _get(raw, "include_oracle", scenario != "single-node-linear", "", bool)
    tabular = None
    linear = None
    if scenario == "single-node-tabular":
        _require("linear" not in raw, "linear", "not valid for scenario single-node-tabular")
        sub = raw.get("tabular", {})
        _require(isinstance(sub, dict), "tabular", "must be a section")
        _check_keys(sub, {"beta", "epsilon"}, "tabular")
        beta = sub.get("beta", 0.8)
        if isinstance(beta, str):
            _require(beta == "visits", "tabular.beta", "must be a number in (0,1] or 'visits'")
        else:
            _require(isinstance(beta, (int, float)) and 0 < beta <= 1, "tabular.beta", "must be in (0, 1]")
            beta = float(beta)
        eps = _parse_epsilon(sub.get("epsilon"), "tabular.epsilon")
        tabular = TabularSpec(LearningSchedule(beta, eps))
    elif scenario == "single-node-linear":
        _require("tabular" not in raw, "tabular", "not valid for scenario single-node-linear")
        sub = raw.get("linear", {})
        _require(isinstance(sub, dict), "linear", "must be a section")
        _check_keys(sub, {"alpha_g", "alpha_l", "alpha_r", "epsilon"}, "linear")
        alpha_g = float(_get(sub, "alpha_g", 0.005, "linear", (int, float), lambda v: v > 0, "must be > 0"))
        alpha_l = float(_get(sub, "alpha_l", 0.005, "linear", (int, float), lambda v: v > 0, "must be > 0"))
        alpha_r = float(_get(sub, "alpha_r", 0.005, "linear", (int, float), lambda v: v > 0, "must be > 0"))
        eps = _parse_epsilon(sub.get("epsilon"), "linear.epsilon")
        linear = LinearSpec(alpha_g, alpha_l, alpha_r, eps)
    else:
        _require("tabular" not in raw, "tabular", f"not valid for scenario {scenario}")
        _require("linear" not in raw, "linear", f"not valid for scenario {scenario}")
    return SingleNodeConfig(
        files,
        cache_size,
        gamma,
        lambdas,
        slots,
        global_chain,
        local_chain,
        observe,
        requests_per_slot,
        include_oracle,
        tabular,
        linear,
    )


def _parse_network(raw: dict, scenario: str) -> NetworkConfig:
    allowed = {
        "files",
        "leaves",
        "leaf_cache",
        "parent_cache",
        "slots_per_interval",
        "intervals",
        "requests_per_slot",
        "leaf_states",
        "leaf_eta_range",
        "stickiness",
        "rho",
        "gamma",
        "weights",
        "dqn",
        "baselines",
    }
    _check_keys(raw, allowed, "")
    files = _get(raw, "files", None, "", int, lambda v: v >= 1, "must be >= 1")
    leaves = _get(raw, "leaves", None, "", int, lambda v: v >= 1, "must be >= 1")
    leaf_cache = _get(raw, "leaf_cache", None, "", int, lambda v: v >= 0, "must be >= 0")
    _require(leaf_cache <= files, "leaf_cache", "must be <= files")
    parent_cache = _get(raw, "parent_cache", None, "", int, lambda v: v >= 0, "must be >= 0")
    _require(parent_cache <= files, "parent_cache", "must be <= files")
    slots_per_interval = _get(raw, "slots_per_interval", 2, "", int, lambda v: v >= 1, "must be >= 1")
    intervals = _get(raw, "intervals", None, "", int, lambda v: v >= 1, "must be >= 1")
    requests_per_slot = _get(raw, "requests_per_slot", 5, "", int, lambda v: v >= 1, "must be >= 1")
    leaf_states = _get(raw, "leaf_states", 2, "", int, lambda v: v >= 1, "must be >= 1")
    rng_raw = raw.get("leaf_eta_range", [0.7, 2.5])
    _require(
        isinstance(rng_raw, list) and len(rng_raw) == 2 and rng_raw[1] > rng_raw[0],
        "leaf_eta_range",
        "must be [lo, hi] with hi > lo",
    )
    stickiness = float(
        _get(raw, "stickiness", 0.0, "", (int, float), lambda v: 0 <= v < 1, "must be in [0, 1)")
    )
    rho = float(_get(raw, "rho", 0.3, "", (int, float), lambda v: 0 < v <= 1, "must be in (0, 1]"))
    gamma = float(_get(raw, "gamma", 0.5, "", (int, float), lambda v: 0 <= v < 1, "must be in [0, 1)"))
    weights = raw.get("weights")
    if weights is not None:
        _require(
            isinstance(weights, list) and len(weights) == leaves,
            "weights",
            "need one weight per leaf",
        )
        _require(all(isinstance(w, (int, float)) and w >= 0 for w in weights), "weights", "must be >= 0")
        weights = tuple(float(w) for w in weights)
    baselines = raw.get("baselines", ["lru", "lfu", "fifo", "noncausal", "nocache"])
    _require(isinstance(baselines, list) and baselines, "baselines", "must be a nonempty list")
    for b in baselines:
        _require(
            b in ("lru", "lfu", "fifo", "noncausal", "nocache"),
            "baselines",
            f"unknown policy {b!r}",
        )
    dqn = None
    if scenario == "network-dqn":
        sub = raw.get("dqn", {})
        _require(isinstance(sub, dict), "dqn", "must be a section")
        d_allowed = {
            "groups",
            "batch",
            "sync",
            "lr",
            "replay",
            "head",
            "hidden_factor",
            "epsilon",
            "cost_scale",
        }
        _check_keys(sub, d_allowed, "dqn")
        groups = _get(sub, "groups", 5, "dqn", int, lambda v: v >= 1, "must be >= 1")
        _require(groups <= files, "dqn.groups", "must be <= files")
        batch = _get(sub, "batch", 32, "dqn", int, lambda v: v >= 1, "must be >= 1")
        sync = _get(sub, "sync", 50, "dqn", int, lambda v: v >= 1, "must be >= 1")
        lr = float(_get(sub, "lr", 1e-3, "dqn", (int, float), lambda v: v > 0, "must be > 0"))
        replay = _get(sub, "replay", 10_000, "dqn", int, lambda v: v >= 1, "must be >= 1")
        head = _get(sub, "head", "linear", "dqn", str, lambda v: v in ("linear", "softmax"))
        hidden_factor = _get(sub, "hidden_factor", 2, "dqn", int, lambda v: v >= 1, "must be >= 1")
        eps_raw = sub.get("epsilon", {})
        _require(isinstance(eps_raw, dict), "dqn.epsilon", "must be a section")
        _check_keys(eps_raw, {"start", "floor", "frac"}, "dqn.epsilon")
        eps_start = float(
            _get(eps_raw, "start", 1.0, "dqn.epsilon", (int, float), lambda v: 0 <= v <= 1, "must be in [0, 1]")
        )
        eps_floor = float(
            _get(eps_raw, "floor", 0.05, "dqn.epsilon", (int, float), lambda v: 0 <= v <= 1, "must be in [0, 1]")
        )
        eps_frac = float(
            _get(eps_raw, "frac", 0.2, "dqn.epsilon", (int, float), lambda v: 0 < v <= 1, "must be in (0, 1]")
        )
        cost_scale = _get(sub, "cost_scale", "requests", "dqn", str, lambda v: v in ("requests", "none"))
        dqn = DQNSpec(groups, batch, sync, lr, replay, head, hidden_factor, eps_start, eps_floor, eps_frac, cost_scale)
    else:
        _require("dqn" not in raw, "dqn", f"not valid for scenario {scenario}")
    return NetworkConfig(
        files,
        leaves,
        leaf_cache,
        parent_cache,
        slots_per_interval,
        intervals,
        requests_per_slot,
        leaf_states,
        (float(rng_raw[0]), float(rng_raw[1])),
        stickiness,
        rho,
        gamma,
        weights,
        dqn,
        tuple(baselines),
    )


def validate_config(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    scenario = _get(raw, "scenario", None, "", str, lambda v: v in SCENARIOS, f"must be one of {SCENARIOS}")
    seeds = raw.get("seeds")
    _require(isinstance(seeds, list) and seeds, "seeds", "must be a nonempty list")
    _require(all(isinstance(s, int) and s >= 0 for s in seeds), "seeds", "must be nonnegative integers")
    chain_seed = _get(raw, "chain_seed", 0, "", int, lambda v: v >= 0, "must be >= 0")
    body = {k: v for k, v in raw.items() if k not in ("scenario", "seeds", "chain_seed")}
    if scenario.startswith("single-node"):
        single = _parse_single(body, scenario)
        cfg = ExperimentConfig(scenario, tuple(seeds), chain_seed, single=single)
    else:
        network = _parse_network(body, scenario)
        cfg = ExperimentConfig(scenario, tuple(seeds), chain_seed, network=network)
    object.__setattr__(cfg, "normalized", _normalize(cfg, raw))
    return cfg


def _normalize(cfg: ExperimentConfig, raw: dict) -> dict:
    """Canonical plain-data view of the validated config, for hashing."""

    def plain(obj):
        if isinstance(obj, (SingleNodeConfig, NetworkConfig, ChainSpec, TabularSpec, LinearSpec, DQNSpec)):
            return {k: plain(v) for k, v in vars(obj).items()}
        if isinstance(obj, LearningSchedule):
            return {"beta": obj.beta, "epsilon": plain(obj.epsilon)}
        if isinstance(obj, EpsilonSchedule):
            return {"mode": obj.mode, "value": obj.value, "burn_in": obj.burn_in, "floor": obj.floor}
        if isinstance(obj, tuple):
            return [plain(v) for v in obj]
        return obj

    out = {"scenario": cfg.scenario, "seeds": list(cfg.seeds), "chain_seed": cfg.chain_seed}
    if cfg.single is not None:
        out["single"] = plain(cfg.single)
    if cfg.network is not None:
        out["network"] = plain(cfg.network)
    return out


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config parse error: {exc}") from None
    return validate_config(raw)


def preset_path(name: str) -> str:
    """Filesystem path of a shipped preset config; name without extension."""
    import os

    path = os.path.join(os.path.dirname(__file__), "presets", f"{name}.yaml")
    if not os.path.exists(path):
        raise ConfigError(f"unknown preset {name!r}")
    return path


def list_presets() -> list[str]:
    import os

    root = os.path.join(os.path.dirname(__file__), "presets")
    return sorted(f[:-5] for f in os.listdir(root) if f.endswith(".yaml"))
