"""The two memory benchmarks: delayed-reproduction memory capacity and
perfect recall of one-hot sequence sets after a delay."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .readout import TrainingSet, r_squared, readout_step, train_readout
from .reservoir import DEFAULT_ACTIVATION, ActivationParams, build_input_weights, run
from .topology import WeightedNetwork


@dataclass(frozen=True)
class MCTaskConfig:
    """Memory-capacity task: reproduce a random 0/1 stream at delays 1..max_delay."""

    washout: int = 500
    train_len: int = 1500
    validation_len: int = 1500
    max_delay: int = 100
    r_sig: float = 0.3
    input_w_min: float = -0.2
    input_w_max: float = 1.0
    input_gain: float = 1.0
    rng_seed: int = 0
    activation: ActivationParams = field(default=DEFAULT_ACTIVATION)

    def __post_init__(self):
        if self.washout < 0:
            raise ValueError("washout must be >= 0")
        if not self.max_delay < self.train_len:
            raise ValueError("max_delay must be < train_len")
        if self.max_delay > self.washout:
            raise ValueError(
                "washout must cover max_delay so every delayed target exists"
            )
        if self.validation_len <= self.max_delay:
            raise ValueError("validation stream shorter than max_delay")
        if not 0 < self.r_sig <= 1:
            raise ValueError("r_sig must lie in (0, 1]")


@dataclass(frozen=True)
class MCResult:
    mc_k: np.ndarray
    mc: float
    mc_k_in_sample: np.ndarray
    mc_in_sample: float


def _drive_episode(w, w_in, rng, washout, length, activation_params):
    u = rng.integers(0, 2, size=washout + length).astype(float)
    history = run(w, w_in, u, np.zeros(w.shape[0]), activation_params)
    return u, history


def run_mc_task(network: WeightedNetwork, cfg: MCTaskConfig) -> MCResult:
    """Train delay readouts on one stream, score r^2 per delay on a fresh one.

    Both episodes start from the zero state and discard the washout. Readout
    k targets u(t-k); performance uses the continuous (pre-threshold) readout.
    """
    w = network.weight_matrix()
    seed_in, seed_train, seed_val = np.random.SeedSequence(cfg.rng_seed).spawn(3)
    w_in = build_input_weights(
        k_inputs=1,
        n_nodes=network.n_nodes,
        target_nodes=np.arange(network.n_nodes),
        r_sig=cfg.r_sig,
        w_min_in=cfg.input_w_min,
        w_max_in=cfg.input_w_max,
        input_gain=cfg.input_gain,
        rng_seed=seed_in,
    )

    u_tr, h_tr = _drive_episode(
        w, w_in, np.random.default_rng(seed_train), cfg.washout, cfg.train_len,
        cfg.activation,
    )
    window = np.arange(cfg.washout, cfg.washout + cfg.train_len)
    x_design = np.vstack([h_tr[:, window], u_tr[window][np.newaxis, :]])
    y_target = np.stack([u_tr[window - k] for k in range(1, cfg.max_delay + 1)])
    layer = train_readout(TrainingSet(x=x_design, y_target=y_target))

    def score(u, history, length):
        idx = np.arange(cfg.washout, cfg.washout + length)
        pred = layer.w_out @ np.vstack([history[:, idx], u[idx][np.newaxis, :]])
        return np.array(
            [r_squared(u[idx - k], pred[k - 1]) for k in range(1, cfg.max_delay + 1)]
        )

    mc_k_in = score(u_tr, h_tr, cfg.train_len)
    u_val, h_val = _drive_episode(
        w, w_in, np.random.default_rng(seed_val), cfg.washout, cfg.validation_len,
        cfg.activation,
    )
    mc_k = score(u_val, h_val, cfg.validation_len)
    return MCResult(
        mc_k=mc_k,
        mc=float(mc_k.sum()),
        mc_k_in_sample=mc_k_in,
        mc_in_sample=float(mc_k_in.sum()),
    )


@dataclass(frozen=True)
class RecallTaskConfig:
    """Recall task: reproduce a learned one-hot sequence after a delay."""

    delta_t: int = 20
    n_sequences: int = 100
    seq_dims: int = 4
    seq_len: int = 5
    cue_enabled: bool = True
    r_sig: float = 0.3
    input_gain: float = 2.0
    input_w_min: float = -0.1
    input_w_max: float = 1.0
    rng_seed: int = 0
    activation: ActivationParams = field(default=DEFAULT_ACTIVATION)

    def __post_init__(self):
        if self.seq_dims != 4 or self.seq_len != 5:
            raise ValueError("the recall task is defined for 4x5 sequences")
        if self.delta_t < 0:
            raise ValueError("delta_t must be >= 0")
        if not 1 <= self.n_sequences <= 4 ** 5:
            raise ValueError(f"n_sequences must lie in [1, {4 ** 5}]")
        if not 0 < self.r_sig <= 1:
            raise ValueError("r_sig must lie in (0, 1]")


@dataclass(frozen=True)
class RecallResult:
    fraction_perfect: float
    passed: np.ndarray


def generate_recall_sequences(n, rng_seed):
    """Draw n distinct 4x5 one-hot sequences uniformly without replacement.

    Each of the 4^5 = 1024 possible sequences is identified with its base-4
    digit string; sampling ids without replacement rules out duplicates.
    """
    total = 4 ** 5
    if not 1 <= n <= total:
        raise ValueError(f"n must lie in [1, {total}]")
    rng = np.random.default_rng(rng_seed)
    ids = rng.choice(total, size=n, replace=False)
    sequences = np.zeros((n, 4, 5), dtype=np.int64)
    for row, seq_id in enumerate(ids):
        remaining = int(seq_id)
        for pos in range(5):
            sequences[row, remaining % 4, pos] = 1
            remaining //= 4
    return sequences


def run_recall_task(network: WeightedNetwork, cfg: RecallTaskConfig) -> RecallResult:
    """Drive each sequence, wait delta_t, cue, and read 20 bits off the final state.

    All sequences are trained jointly on their final-time [x:u] columns and
    evaluated on the same set (the task measures fitting capacity). A
    sequence passes only if all 20 thresholded readouts match its bits.
    """
    w = network.weight_matrix()
    seed_seq, seed_in = np.random.SeedSequence(cfg.rng_seed).spawn(2)
    sequences = generate_recall_sequences(cfg.n_sequences, seed_seq)
    k_inputs = cfg.seq_dims + (1 if cfg.cue_enabled else 0)
    w_in = build_input_weights(
        k_inputs=k_inputs,
        n_nodes=network.n_nodes,
        target_nodes=np.arange(network.n_nodes),
        r_sig=cfg.r_sig,
        w_min_in=cfg.input_w_min,
        w_max_in=cfg.input_w_max,
        input_gain=cfg.input_gain,
        rng_seed=seed_in,
    )

    n_steps = cfg.seq_len + cfg.delta_t + (1 if cfg.cue_enabled else 0)
    columns = []
    final_inputs = []
    for seq in sequences:
        u = np.zeros((k_inputs, n_steps))
        u[: cfg.seq_dims, : cfg.seq_len] = seq
        if cfg.cue_enabled:
            u[cfg.seq_dims, n_steps - 1] = 1.0
        history = run(w, w_in, u, np.zeros(network.n_nodes), cfg.activation)
        columns.append(history[:, -1])
        final_inputs.append(u[:, -1])

    x_design = np.vstack([np.stack(columns, axis=1), np.stack(final_inputs, axis=1)])
    y_target = sequences.reshape(cfg.n_sequences, -1).T.astype(float)
    with warnings.catch_warnings():
        # fitting capacity on purpose: one column per sequence is the design
        warnings.simplefilter("ignore")
        layer = train_readout(TrainingSet(x=x_design, y_target=y_target))
    predicted = readout_step(layer.w_out @ x_design)
    passed = np.all(predicted == y_target.astype(np.int64), axis=0)
    return RecallResult(
        fraction_perfect=float(passed.sum() / cfg.n_sequences),
        passed=passed,
    )
