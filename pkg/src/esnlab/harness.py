"""Deterministic parameter sweeps: configuration, seeding, parallel
execution, and long-format CSV persistence.

A sweep enumerates the (mu, r_sig, W_s) grid in config order; every
(cell, realization) job gets a seed derived by counter-based hashing from
the master seed, so reruns are byte-identical regardless of worker count.
"""

from __future__ import annotations

import dataclasses
import hashlib
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import dynamics, tasks, topology

_MASK64 = (1 << 64) - 1

EXPERIMENTS = ("mc", "recall", "spread_two", "spread_many", "attractors", "spectrum")


class ConfigError(ValueError):
    """Raised for malformed or out-of-range sweep configuration."""


def derive_seed(master_seed, cell_index, realization_index) -> int:
    """Collision-resistant 64-bit seed for one (cell, realization) job."""
    payload = struct.pack(
        "<QQQ",
        master_seed & _MASK64,
        cell_index & _MASK64,
        realization_index & _MASK64,
    )
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def split_seed(seed, n):
    """Expand one seed into n independent child seeds."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n, dtype=np.uint64)]


@dataclass(frozen=True)
class SweepConfig:
    """Flat sweep configuration; every key appears in the config file grammar."""

    experiment: str = "mc"
    # network
    n_nodes: int = 500
    n_communities: int = 50
    degree: int = 6
    w_min: float = -0.2
    w_max: float = 1.0
    symmetric_weights: bool = False
    rho_target: float | None = None
    # grids
    mu: tuple = (0.2,)
    r_sig: tuple = (0.3,)
    w_s: tuple = (1.13,)
    # sweep bookkeeping
    n_realizations: int = 1
    master_seed: int = 0
    out: str = "sweep.csv"
    # memory-capacity task
    washout: int = 500
    train_len: int = 1500
    validation_len: int = 1500
    max_delay: int = 100
    input_gain: float = 1.0
    # recall task
    delta_t: int = 20
    n_sequences: int = 100
    cue_enabled: bool = True
    # spreading
    input_value: float = 1.0
    eps_eq: float = 1e-6
    max_steps: int = 1000
    # attractor census
    n_probes: int = 100
    quantization: float = 1e-6
    max_transient: int = 2000
    max_period: int = 500

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(float(v) for v in _aslist(self.mu)))
        object.__setattr__(self, "r_sig", tuple(float(v) for v in _aslist(self.r_sig)))
        object.__setattr__(self, "w_s", tuple(float(v) for v in _aslist(self.w_s)))

    def cells(self):
        """Grid cells in canonical order; cell_index enumerates this list."""
        return [
            (mu, r_sig, w_s)
            for mu in self.mu
            for r_sig in self.r_sig
            for w_s in self.w_s
        ]


def _aslist(v):
    return v if isinstance(v, (list, tuple)) else [v]


# Per-experiment defaults differing from the dataclass baseline (which is
# tuned for the memory-capacity task).
_EXPERIMENT_DEFAULTS = {
    "mc": {},
    "recall": {
        "degree": 7,
        "w_min": -0.1,
        "w_max": 1.0,
        "w_s": (1.0,),
        "input_gain": 2.0,
    },
    "spread_two": {
        "n_communities": 2,
        "w_s": (dynamics.SPREADING_WEIGHTS.weight_scale,),
    },
    "spread_many": {
        "w_s": (dynamics.SPREADING_WEIGHTS.weight_scale,),
    },
    "attractors": {
        "degree": 7,
        "w_min": -0.1,
        "w_max": 1.0,
        "w_s": (1.0,),
        "input_gain": 2.0,
    },
    "spectrum": {},
}


def default_config(experiment, **overrides) -> SweepConfig:
    """Config pre-populated with the experiment's customary parameters."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment '{experiment}'; one of {EXPERIMENTS}")
    params = {"experiment": experiment, **_EXPERIMENT_DEFAULTS[experiment]}
    params.update(overrides)
    return SweepConfig(**params)


def validate_config(cfg: SweepConfig):
    """Raise ConfigError on any out-of-range or inconsistent value."""
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment '{cfg.experiment}'; one of {EXPERIMENTS}")
    if not cfg.mu or not cfg.r_sig or not cfg.w_s:
        raise ConfigError("mu, r_sig and w_s grids must be nonempty")
    for v in cfg.mu:
        if not 0.0 <= v < 1.0:
            raise ConfigError(f"mu={v} outside [0, 1)")
    for v in cfg.r_sig:
        if not 0.0 < v <= 1.0:
            raise ConfigError(f"r_sig={v} outside (0, 1]")
    for v in cfg.w_s:
        if v < 0:
            raise ConfigError(f"w_s={v} must be >= 0")
    if cfg.n_realizations < 1:
        raise ConfigError("n_realizations must be >= 1")
    if cfg.n_nodes < 1 or cfg.degree < 1:
        raise ConfigError("n_nodes and degree must be positive")
    n_comm = 2 if cfg.experiment == "spread_two" else cfg.n_communities
    if cfg.n_nodes % n_comm != 0:
        raise ConfigError(
            f"n_nodes={cfg.n_nodes} not divisible into {n_comm} equal communities"
        )
    if cfg.degree >= cfg.n_nodes // n_comm and 0.0 in cfg.mu:
        raise ConfigError("degree too high for the community size at mu=0")
    if not cfg.w_min < cfg.w_max:
        raise ConfigError("w_min must be < w_max")
    if cfg.rho_target is not None and cfg.rho_target <= 0:
        raise ConfigError("rho_target must be positive when set")
    if cfg.experiment == "mc":
        if cfg.max_delay > cfg.washout:
            raise ConfigError("washout must cover max_delay")
        if cfg.max_delay >= cfg.train_len:
            raise ConfigError("max_delay must be < train_len")
        if cfg.validation_len <= cfg.max_delay:
            raise ConfigError("validation_len must exceed max_delay")
    if cfg.experiment == "recall" and not 1 <= cfg.n_sequences <= 1024:
        raise ConfigError("n_sequences must lie in [1, 1024]")
    if cfg.experiment == "attractors" and not 1 <= cfg.n_probes <= 1024:
        raise ConfigError("n_probes must lie in [1, 1024]")
    return cfg


# ---------------------------------------------------------------------------
# config file grammar: one `key = value` per line, '#' comments, lists as
# whitespace-separated values. Types are fixed per key.

_LIST_KEYS = {"mu", "r_sig", "w_s"}
_OPTIONAL_KEYS = {"rho_target"}


def _parse_scalar(token, target_type):
    if target_type is bool:
        if token.lower() in ("true", "1", "yes"):
            return True
        if token.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"expected boolean, got '{token}'")
    return target_type(token)


def parse_config(text: str) -> SweepConfig:
    field_types = {f.name: f.type for f in dataclasses.fields(SweepConfig)}
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in field_types:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        raw[key] = (lineno, value)

    if "experiment" not in raw:
        raise ConfigError("config must set 'experiment'")
    experiment = raw.pop("experiment")[1]
    overrides = {}
    scalar_types = {
        "int": int, "float": float, "str": str, "bool": bool,
        "tuple": float, "float | None": float,
    }
    for key, (lineno, value) in raw.items():
        tokens = value.split()
        if not tokens:
            raise ConfigError(f"line {lineno}: empty value for '{key}'")
        type_name = str(field_types[key])
        base = scalar_types.get(type_name)
        if base is None:
            for name, t in scalar_types.items():
                if name in type_name:
                    base = t
                    break
        if base is None:
            raise ConfigError(f"line {lineno}: unsupported key '{key}'")
        try:
            if key in _LIST_KEYS:
                overrides[key] = tuple(_parse_scalar(t, float) for t in tokens)
            elif key in _OPTIONAL_KEYS:
                overrides[key] = None if tokens[0].lower() == "none" else _parse_scalar(tokens[0], base)
            elif len(tokens) != 1:
                raise ConfigError(f"line {lineno}: '{key}' takes a single value")
            else:
                overrides[key] = _parse_scalar(tokens[0], base)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"line {lineno}: bad value for '{key}': {exc}") from exc
    return validate_config(default_config(experiment, **overrides))


def serialize_config(cfg: SweepConfig) -> str:
    """Canonical full-form rendering; parse(serialize(cfg)) == cfg."""
    lines = []
    for f in dataclasses.fields(SweepConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            rendered = " ".join(repr(v) for v in value)
        elif value is None:
            rendered = "none"
        elif isinstance(value, bool):
            rendered = "true" if value else "false"
        elif isinstance(value, float):
            rendered = repr(value)
        else:
            rendered = str(value)
        lines.append(f"{f.name} = {rendered}")
    return "\n".join(lines) + "\n"


def load_config(path) -> SweepConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------------------
# job execution


def build_network(cfg: SweepConfig, mu, w_s, graph_seed, weight_seed):
    n_comm = 2 if cfg.experiment == "spread_two" else cfg.n_communities
    spec = topology.ModularGraphSpec.flat(
        cfg.n_nodes, n_comm, cfg.degree, mu, rng_seed=graph_seed
    )
    network = topology.assign_weights(
        topology.generate_modular_graph(spec),
        topology.WeightParams(cfg.w_min, cfg.w_max, w_s),
        weight_seed,
        symmetric=cfg.symmetric_weights,
    )
    if cfg.rho_target is not None:
        network = topology.rescale_to_spectral_radius(network, cfg.rho_target)
    return network


def run_cell_job(cfg: SweepConfig, mu, r_sig, w_s, seed):
    """Execute one (cell, realization) job; returns [(metric, value), ...]."""
    graph_seed, weight_seed, task_seed = split_seed(seed, 3)
    network = build_network(cfg, mu, w_s, graph_seed, weight_seed)
    rows = [("measured_mu", topology.measured_mu(network))]

    if cfg.experiment == "mc":
        result = tasks.run_mc_task(network, tasks.MCTaskConfig(
            washout=cfg.washout,
            train_len=cfg.train_len,
            validation_len=cfg.validation_len,
            max_delay=cfg.max_delay,
            r_sig=r_sig,
            input_w_min=cfg.w_min,
            input_w_max=cfg.w_max,
            input_gain=cfg.input_gain,
            rng_seed=task_seed,
        ))
        rows.append(("mc", result.mc))
        rows.append(("mc_in_sample", result.mc_in_sample))
        rows.extend(
            (f"mc_k_{k:03d}", float(v)) for k, v in enumerate(result.mc_k, start=1)
        )
    elif cfg.experiment == "recall":
        result = tasks.run_recall_task(network, tasks.RecallTaskConfig(
            delta_t=cfg.delta_t,
            n_sequences=cfg.n_sequences,
            cue_enabled=cfg.cue_enabled,
            r_sig=r_sig,
            input_gain=cfg.input_gain,
            input_w_min=cfg.w_min,
            input_w_max=cfg.w_max,
            rng_seed=task_seed,
        ))
        rows.append(("fraction_perfect", result.fraction_perfect))
    elif cfg.experiment in ("spread_two", "spread_many"):
        kind = "two_community" if cfg.experiment == "spread_two" else "distributed"
        spread_cfg = dynamics.SpreadingConfig(
            kind=kind,
            r_sig=r_sig,
            input_value=cfg.input_value,
            input_gain=cfg.input_gain,
            eps_eq=cfg.eps_eq,
            max_steps=cfg.max_steps,
        )
        driven, baseline = dynamics.spreading_profiles(network, spread_cfg, task_seed)
        if kind == "two_community":
            rows.append(("activation_seed", float(driven.community_activation[0])))
            rows.append(("activation_neighbor", float(driven.community_activation[1])))
            rows.append(("baseline_seed", float(baseline.community_activation[0])))
            rows.append(("baseline_neighbor", float(baseline.community_activation[1])))
        rows.append(("activation_total", driven.total_activation))
        rows.append(("baseline_total", baseline.total_activation))
        rows.append(("t_e", float(driven.t_e)))
        rows.append(("converged", float(driven.converged)))
    elif cfg.experiment == "attractors":
        ics = dynamics.sequence_initial_conditions(
            network,
            r_sig=r_sig,
            input_gain=cfg.input_gain,
            input_w_min=cfg.w_min,
            input_w_max=cfg.w_max,
            n_probes=cfg.n_probes,
            rng_seed=task_seed,
        )
        summary = dynamics.enumerate_attractors(
            network.weight_matrix(),
            ics,
            quantization=cfg.quantization,
            max_transient=cfg.max_transient,
            max_period=cfg.max_period,
        )
        rows.append(("n_unique_attractors", float(summary.n_unique_attractors)))
        rows.append(("n_fixed_points", float(summary.n_fixed_points)))
        rows.append(("n_limit_cycles", float(summary.n_limit_cycles)))
        rows.append(("n_unresolved", float(summary.n_unresolved)))
    elif cfg.experiment == "spectrum":
        report = topology.spectrum(network)
        rows.append(("lambda1_abs", report.lambda1_abs))
        rows.append(("lambda2_abs", report.lambda2_abs))
        rows.append(("spectral_gap", report.spectral_gap))
    else:
        raise ConfigError(f"unknown experiment '{cfg.experiment}'")
    return rows


@dataclass(frozen=True)
class SweepRow:
    experiment: str
    mu: float
    r_sig: float
    w_s: float
    realization: int
    seed: int
    metric: str
    value: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    n_failed: int

    def to_csv(self) -> str:
        lines = ["experiment,mu,r_sig,w_s,realization,seed,metric,value"]
        for r in self.rows:
            lines.append(
                f"{r.experiment},{r.mu!r},{r.r_sig!r},{r.w_s!r},"
                f"{r.realization},{r.seed},{r.metric},{r.value!r}"
            )
        return "\n".join(lines) + "\n"


def _job(args):
    cfg, cell_index, mu, r_sig, w_s, realization, seed = args
    try:
        rows = run_cell_job(cfg, mu, r_sig, w_s, seed)
        return cell_index, realization, rows, None
    except Exception as exc:  # job isolation: a failed cell must not kill the sweep
        return cell_index, realization, [("error", 1.0)], str(exc)


def run_sweep(cfg: SweepConfig, workers=1, progress=None) -> SweepResult:
    """Run every (cell, realization) job and assemble rows in canonical order.

    Jobs are independent and seeded individually, so any worker count yields
    the same result. Failed jobs contribute a single "error" row.
    """
    validate_config(cfg)
    jobs = []
    for cell_index, (mu, r_sig, w_s) in enumerate(cfg.cells()):
        for realization in range(cfg.n_realizations):
            seed = derive_seed(cfg.master_seed, cell_index, realization)
            jobs.append((cfg, cell_index, mu, r_sig, w_s, realization, seed))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_job, jobs, chunksize=1))
    else:
        outcomes = [_job(j) for j in jobs]

    by_key = {}
    n_failed = 0
    for (cell_index, realization, rows, error), job in zip(outcomes, jobs):
        by_key[(cell_index, realization)] = (job, rows)
        if error is not None:
            n_failed += 1
            if progress is not None:
                progress(f"job cell={cell_index} realization={realization} failed: {error}")

    out_rows = []
    for cell_index, (mu, r_sig, w_s) in enumerate(cfg.cells()):
        for realization in range(cfg.n_realizations):
            job, rows = by_key[(cell_index, realization)]
            seed = job[6]
            for metric, value in rows:
                out_rows.append(SweepRow(
                    experiment=cfg.experiment,
                    mu=mu,
                    r_sig=r_sig,
                    w_s=w_s,
                    realization=realization,
                    seed=seed,
                    metric=metric,
                    value=float(value),
                ))
    return SweepResult(rows=tuple(out_rows), n_failed=n_failed)


def write_sweep_csv(result: SweepResult, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(result.to_csv())
