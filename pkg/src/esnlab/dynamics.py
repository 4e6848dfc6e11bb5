"""Information-spreading experiments and the attractor census.

Spreading runs hold a constant input on a stimulated node set until the
state settles; activity is summarized as the mean state per community and
over the whole network. The attractor census drives the reservoir with
short one-hot sequences, releases it, and deduplicates the invariant sets
it falls into via quantized-state recurrence detection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .reservoir import (
    DEFAULT_ACTIVATION,
    ActivationParams,
    activation,
    build_input_weights,
    run,
    unit_input_weights,
)
from .tasks import generate_recall_sequences
from .topology import (
    ModularGraphSpec,
    WeightedNetwork,
    WeightParams,
    assign_weights,
    generate_modular_graph,
)

# Weight bounds for the spreading experiments. The scale is calibrated so the
# quiescent network does not self-ignite while a driven community saturates;
# see SPREADING_WEIGHTS.weight_scale.
SPREADING_WEIGHTS = WeightParams(w_min=-0.2, w_max=1.0, weight_scale=0.35)


@dataclass(frozen=True)
class SpreadingConfig:
    kind: str = "two_community"  # or "distributed"
    r_sig: float = 0.3
    input_value: float = 1.0
    input_gain: float = 1.0
    eps_eq: float = 1e-6
    max_steps: int = 1000
    rng_seed: int = 0
    activation: ActivationParams = field(default=DEFAULT_ACTIVATION)

    def __post_init__(self):
        if self.kind not in ("two_community", "distributed"):
            raise ValueError("kind must be 'two_community' or 'distributed'")
        if self.eps_eq <= 0:
            raise ValueError("eps_eq must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(frozen=True)
class ActivationProfile:
    """Mean state per community and network-wide at the settled point."""

    community_activation: np.ndarray
    total_activation: float
    t_e: int
    converged: bool


def run_to_equilibrium(w, w_in, u_const, params=DEFAULT_ACTIVATION,
                       eps_eq=1e-6, max_steps=1000, x0=None):
    """Iterate the update with constant input until the state stops moving.

    Returns (x, t_e, converged); converged means the max-norm step difference
    dropped below eps_eq at t_e. Non-convergence is not an error: some
    parameter regions settle into limit cycles instead of fixed points.
    """
    n = w.shape[0]
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    drive = None
    if w_in is not None and u_const is not None:
        w_in_matrix = w_in.matrix if hasattr(w_in, "matrix") else np.asarray(w_in)
        drive = w_in_matrix @ np.atleast_1d(np.asarray(u_const, dtype=float))
    for t in range(1, max_steps + 1):
        z = w @ x
        if drive is not None:
            z = z + drive
        x_next = activation(z, params)
        if np.max(np.abs(x_next - x)) < eps_eq:
            return x_next, t, True
        x = x_next
    return x, max_steps, False


def _settled_state(w, w_in, u_const, params, eps_eq, max_steps,
                   cycle_quantization=1e-6, max_period=500):
    """Settled state for reporting: the fixed point if one is reached, else
    the time average over one detected cycle, else over a trailing window."""
    x, t_e, converged = run_to_equilibrium(w, w_in, u_const, params, eps_eq, max_steps)
    if converged:
        return x, t_e, True
    drive = None
    if w_in is not None and u_const is not None:
        w_in_matrix = w_in.matrix if hasattr(w_in, "matrix") else np.asarray(w_in)
        drive = w_in_matrix @ np.atleast_1d(np.asarray(u_const, dtype=float))

    def advance(state):
        z = w @ state
        if drive is not None:
            z = z + drive
        return activation(z, params)

    seen = {}
    states = []
    for i in range(2 * max_period):
        key = np.round(x / cycle_quantization).astype(np.int64).tobytes()
        if key in seen:
            cycle = np.stack(states[seen[key]:], axis=0)
            return cycle.mean(axis=0), t_e + i, False
        seen[key] = i
        states.append(x)
        x = advance(x)
    tail = np.stack(states[-100:], axis=0)
    return tail.mean(axis=0), t_e + 2 * max_period, False


def community_profile(x, community_of, t_e, converged) -> ActivationProfile:
    n_comm = int(community_of.max()) + 1
    per_comm = np.array([x[community_of == c].mean() for c in range(n_comm)])
    return ActivationProfile(
        community_activation=per_comm,
        total_activation=float(x.mean()),
        t_e=int(t_e),
        converged=bool(converged),
    )


def spreading_profiles(network: WeightedNetwork, cfg: SpreadingConfig, input_seed=0):
    """Driven and baseline profiles on a prebuilt weighted network.

    The driven run holds the constant input on the stimulated set until the
    state settles; the baseline run has no input at all. r_sig == 0 is
    accepted here and means the driven run degenerates to the baseline.
    """
    w = network.weight_matrix()
    if cfg.r_sig > 0:
        if cfg.kind == "two_community":
            targets = network.community_members(0)
        else:
            targets = np.arange(network.n_nodes)
        w_in = unit_input_weights(
            k_inputs=1,
            n_nodes=network.n_nodes,
            target_nodes=targets,
            r_sig=cfg.r_sig,
            input_gain=cfg.input_gain,
            rng_seed=input_seed,
        )
        x, t_e, converged = _settled_state(
            w, w_in, [cfg.input_value], cfg.activation, cfg.eps_eq, cfg.max_steps
        )
    else:
        x, t_e, converged = _settled_state(
            w, None, None, cfg.activation, cfg.eps_eq, cfg.max_steps
        )
    driven = community_profile(x, network.community_of, t_e, converged)

    xb, tb, cb = _settled_state(w, None, None, cfg.activation, cfg.eps_eq, cfg.max_steps)
    baseline = community_profile(xb, network.community_of, tb, cb)
    return driven, baseline


def spreading_realization(cfg: SpreadingConfig, mu, n_nodes=500, degree=6,
                          n_communities=None, weight_params=SPREADING_WEIGHTS,
                          seed=0):
    """One spreading run on a freshly generated network realization."""
    if n_communities is None:
        n_communities = 2 if cfg.kind == "two_community" else 50
    seed_graph, seed_weights, seed_input = np.random.SeedSequence(seed).spawn(3)
    spec = ModularGraphSpec.flat(n_nodes, n_communities, degree, mu,
                                 rng_seed=seed_graph)
    network = assign_weights(generate_modular_graph(spec), weight_params, seed_weights)
    return spreading_profiles(network, cfg, input_seed=seed_input)


@dataclass(frozen=True)
class SpreadingCellSummary:
    mu: float
    r_sig: float
    n_realizations: int
    driven_community_mean: np.ndarray
    driven_community_std: np.ndarray
    driven_total_mean: float
    driven_total_std: float
    baseline_community_mean: np.ndarray
    baseline_total_mean: float
    t_e_mean: float
    converged_fraction: float


def _aggregate(mu, r_sig, results):
    driven = np.stack([d.community_activation for d, _ in results])
    base = np.stack([b.community_activation for _, b in results])
    totals = np.array([d.total_activation for d, _ in results])
    return SpreadingCellSummary(
        mu=float(mu),
        r_sig=float(r_sig),
        n_realizations=len(results),
        driven_community_mean=driven.mean(axis=0),
        driven_community_std=driven.std(axis=0),
        driven_total_mean=float(totals.mean()),
        driven_total_std=float(totals.std()),
        baseline_community_mean=base.mean(axis=0),
        baseline_total_mean=float(np.mean([b.total_activation for _, b in results])),
        t_e_mean=float(np.mean([d.t_e for d, _ in results])),
        converged_fraction=float(np.mean([d.converged for d, _ in results])),
    )


def two_community_experiment(mu_values, r_sig_values, n_nodes=500, degree=6,
                             n_realizations=48, weight_params=SPREADING_WEIGHTS,
                             master_seed=0, **cfg_kwargs):
    """Seed-community stimulation over a (mu, r_sig) grid; mean over realizations."""
    cells = []
    for i, mu in enumerate(mu_values):
        for j, r_sig in enumerate(r_sig_values):
            cfg = SpreadingConfig(kind="two_community", r_sig=r_sig, **cfg_kwargs)
            results = [
                spreading_realization(
                    cfg, mu, n_nodes=n_nodes, degree=degree,
                    weight_params=weight_params,
                    seed=np.random.SeedSequence(
                        (master_seed, i * len(r_sig_values) + j, r)
                    ).generate_state(1)[0],
                )
                for r in range(n_realizations)
            ]
            cells.append(_aggregate(mu, r_sig, results))
    return cells


def distributed_input_experiment(mu_values, r_sig_values, n_nodes=500,
                                 n_communities=50, degree=6, n_realizations=48,
                                 weight_params=SPREADING_WEIGHTS, master_seed=0,
                                 **cfg_kwargs):
    """Network-wide random stimulation over a (mu, r_sig) grid."""
    cells = []
    for i, mu in enumerate(mu_values):
        for j, r_sig in enumerate(r_sig_values):
            cfg = SpreadingConfig(kind="distributed", r_sig=r_sig, **cfg_kwargs)
            results = [
                spreading_realization(
                    cfg, mu, n_nodes=n_nodes, degree=degree,
                    n_communities=n_communities, weight_params=weight_params,
                    seed=np.random.SeedSequence(
                        (master_seed, i * len(r_sig_values) + j, r)
                    ).generate_state(1)[0],
                )
                for r in range(n_realizations)
            ]
            cells.append(_aggregate(mu, r_sig, results))
    return cells


def profiles_to_csv(cells) -> str:
    """Phase-diagram export, one row per community plus a network total."""
    lines = ["mu,r_sig,community_id,activation_mean,activation_std,t_e_mean,n_samples"]
    for cell in cells:
        for c, (m, s) in enumerate(
            zip(cell.driven_community_mean, cell.driven_community_std)
        ):
            lines.append(
                f"{cell.mu!r},{cell.r_sig!r},{c},{m!r},{s!r},"
                f"{cell.t_e_mean!r},{cell.n_realizations}"
            )
        lines.append(
            f"{cell.mu!r},{cell.r_sig!r},total,{cell.driven_total_mean!r},"
            f"{cell.driven_total_std!r},{cell.t_e_mean!r},{cell.n_realizations}"
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class AttractorRecord:
    kind: str  # "fixed_point" | "limit_cycle"
    period: int
    basin_size: int
    representative: np.ndarray
    cycle_keys: tuple


@dataclass(frozen=True)
class AttractorSummary:
    n_unique_attractors: int
    n_fixed_points: int
    n_limit_cycles: int
    n_unresolved: int
    n_initial_conditions: int
    records: tuple


def _canonical_rotation(keys):
    best = None
    for i in range(len(keys)):
        rotated = keys[i:] + keys[:i]
        if best is None or rotated < best:
            best = rotated
    return best


def _quantize(x, q):
    return np.round(x / q).astype(np.int64).tobytes()


def enumerate_attractors(w, initial_conditions, quantization=1e-6,
                         max_transient=2000, max_period=500,
                         params=DEFAULT_ACTIVATION) -> AttractorSummary:
    """Census of the invariant sets reached from the given states.

    Each initial state evolves under the autonomous (zero input) dynamics;
    recurrence of a quantized state closes an orbit whose canonical rotation
    identifies the attractor. Orbits that fail to recur within the transient
    and period bounds are counted separately as unresolved.
    """
    found = {}
    order = []
    unresolved = 0
    for x0 in initial_conditions:
        x = np.asarray(x0, dtype=float)
        seen = {}
        states = []
        keys = []
        resolved = False
        for i in range(max_transient + max_period + 1):
            key = _quantize(x, quantization)
            if key in seen:
                start = seen[key]
                period = i - start
                if start <= max_transient and period <= max_period:
                    cycle = _canonical_rotation(tuple(keys[start:]))
                    if cycle not in found:
                        found[cycle] = {
                            "period": period,
                            "basin": 0,
                            "representative": states[start].copy(),
                        }
                        order.append(cycle)
                    found[cycle]["basin"] += 1
                    resolved = True
                break
            seen[key] = i
            keys.append(key)
            states.append(x)
            x = activation(w @ x, params)
        if not resolved:
            unresolved += 1

    records = tuple(
        AttractorRecord(
            kind="fixed_point" if found[c]["period"] == 1 else "limit_cycle",
            period=found[c]["period"],
            basin_size=found[c]["basin"],
            representative=found[c]["representative"],
            cycle_keys=c,
        )
        for c in order
    )
    return AttractorSummary(
        n_unique_attractors=len(records),
        n_fixed_points=sum(1 for r in records if r.kind == "fixed_point"),
        n_limit_cycles=sum(1 for r in records if r.kind == "limit_cycle"),
        n_unresolved=unresolved,
        n_initial_conditions=len(initial_conditions),
        records=records,
    )


def replay_cycle(record: AttractorRecord, w, quantization=1e-6,
                 params=DEFAULT_ACTIVATION) -> bool:
    """Check that iterating the map from the representative retraces the cycle."""
    x = np.asarray(record.representative, dtype=float)
    keys = []
    for _ in range(record.period):
        keys.append(_quantize(x, quantization))
        x = activation(w @ x, params)
    if _quantize(x, quantization) != keys[0]:
        return False
    return _canonical_rotation(tuple(keys)) == record.cycle_keys


def sequence_initial_conditions(network: WeightedNetwork, r_sig, input_gain,
                                input_w_min, input_w_max, n_probes, rng_seed,
                                params=DEFAULT_ACTIVATION):
    """Post-drive states replicating the recall setting: drive the reservoir
    from zero with each 4x5 one-hot sequence, then release it."""
    seed_seq, seed_in = np.random.SeedSequence(rng_seed).spawn(2)
    sequences = generate_recall_sequences(n_probes, seed_seq)
    w = network.weight_matrix()
    w_in = build_input_weights(
        k_inputs=4,
        n_nodes=network.n_nodes,
        target_nodes=np.arange(network.n_nodes),
        r_sig=r_sig,
        w_min_in=input_w_min,
        w_max_in=input_w_max,
        input_gain=input_gain,
        rng_seed=seed_in,
    )
    states = []
    for seq in sequences:
        history = run(w, w_in, seq.astype(float), np.zeros(network.n_nodes), params)
        states.append(history[:, -1])
    return states
