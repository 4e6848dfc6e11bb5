"""Discrete-time reservoir dynamics with a steep, threshold-like sigmoid.

The state update is x(t+1) = f(W x(t) + W_in u(t+1)) applied componentwise;
there is no feedback from readouts and no leak term. W is applied as a
sparse matrix-vector product (typical density ~1% at degree 6).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

# exp() saturates beyond this; clamping is the mathematically correct limit
_EXP_CLAMP = 500.0


@dataclass(frozen=True)
class ActivationParams:
    """Constants of f(z) = a * (b / (1 + exp(-k z + c)) - d)."""

    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    k_steepness: float = 10.0
    d: float = 0.0

    def __post_init__(self):
        if self.k_steepness <= 0:
            raise ValueError("k_steepness must be positive")


DEFAULT_ACTIVATION = ActivationParams()


def activation(z, params: ActivationParams = DEFAULT_ACTIVATION):
    """Sigmoid response; accepts scalars or arrays, monotone increasing in z."""
    arg = np.clip(params.k_steepness * np.asarray(z, dtype=float) - params.c,
                  -_EXP_CLAMP, _EXP_CLAMP)
    value = params.a * (params.b / (1.0 + np.exp(-arg)) - params.d)
    return float(value) if np.isscalar(z) else value


@dataclass(frozen=True)
class ReservoirState:
    x: np.ndarray
    t: int = 0


@dataclass(frozen=True)
class InputWeights:
    """Input matrix W_in (n_nodes x k_inputs) plus the stimulated node sets."""

    matrix: np.ndarray
    r_sig: float
    input_gain: float
    target_node_sets: tuple

    @property
    def k_inputs(self):
        return self.matrix.shape[1]


def build_input_weights(k_inputs, n_nodes, target_nodes, r_sig,
                        w_min_in, w_max_in, input_gain, rng_seed) -> InputWeights:
    """Wire each input dimension into round(r_sig * |target_nodes|) nodes.

    The stimulated subset is drawn independently per dimension; nonzero
    entries are Uniform[w_min_in, w_max_in] scaled by input_gain.
    """
    if not 0 < r_sig <= 1:
        raise ValueError("r_sig must lie in (0, 1]")
    target_nodes = np.asarray(target_nodes, dtype=np.int64)
    if len(target_nodes) == 0:
        raise ValueError("target_nodes must be nonempty")
    n_stim = int(round(r_sig * len(target_nodes)))
    if n_stim == 0:
        raise ValueError(
            f"r_sig={r_sig} stimulates zero of {len(target_nodes)} target nodes"
        )
    rng = np.random.default_rng(rng_seed)
    matrix = np.zeros((n_nodes, k_inputs))
    chosen = []
    for dim in range(k_inputs):
        nodes = rng.choice(target_nodes, size=n_stim, replace=False)
        matrix[nodes, dim] = rng.uniform(w_min_in, w_max_in, size=n_stim) * input_gain
        chosen.append(np.sort(nodes))
    return InputWeights(
        matrix=matrix,
        r_sig=float(r_sig),
        input_gain=float(input_gain),
        target_node_sets=tuple(chosen),
    )


def unit_input_weights(k_inputs, n_nodes, target_nodes, r_sig, input_gain, rng_seed):
    """Input weights fixed at input_gain on the stimulated set (no value draw).

    Used by the spreading experiments, where a stimulated node receives a
    constant unit drive rather than a randomly weighted one.
    """
    if not 0 < r_sig <= 1:
        raise ValueError("r_sig must lie in (0, 1]")
    target_nodes = np.asarray(target_nodes, dtype=np.int64)
    n_stim = int(round(r_sig * len(target_nodes)))
    if n_stim == 0:
        raise ValueError(
            f"r_sig={r_sig} stimulates zero of {len(target_nodes)} target nodes"
        )
    rng = np.random.default_rng(rng_seed)
    matrix = np.zeros((n_nodes, k_inputs))
    chosen = []
    for dim in range(k_inputs):
        nodes = rng.choice(target_nodes, size=n_stim, replace=False)
        matrix[nodes, dim] = input_gain
        chosen.append(np.sort(nodes))
    return InputWeights(
        matrix=matrix,
        r_sig=float(r_sig),
        input_gain=float(input_gain),
        target_node_sets=tuple(chosen),
    )


def _as_operator(w, n):
    if w is None:
        return None
    if sp.issparse(w):
        if w.shape != (n, n):
            raise ValueError(f"W has shape {w.shape}, expected ({n}, {n})")
        return sp.csr_matrix(w)
    w = np.asarray(w, dtype=float)
    if w.shape != (n, n):
        raise ValueError(f"W has shape {w.shape}, expected ({n}, {n})")
    return w


def step(state: ReservoirState, w, w_in, u_next,
         params: ActivationParams = DEFAULT_ACTIVATION) -> ReservoirState:
    """One update of the reservoir map."""
    x = np.asarray(state.x, dtype=float)
    n = x.shape[0]
    op = _as_operator(w, n)
    z = op @ x if op is not None else np.zeros(n)
    if w_in is not None and u_next is not None:
        w_in_matrix = w_in.matrix if isinstance(w_in, InputWeights) else np.asarray(w_in)
        u_next = np.atleast_1d(np.asarray(u_next, dtype=float))
        if w_in_matrix.shape[0] != n or w_in_matrix.shape[1] != u_next.shape[0]:
            raise ValueError(
                f"W_in shape {w_in_matrix.shape} incompatible with state {n} "
                f"and input {u_next.shape}"
            )
        z = z + w_in_matrix @ u_next
    return ReservoirState(x=activation(z, params), t=state.t + 1)


def run(w, w_in, inputs, x0, params: ActivationParams = DEFAULT_ACTIVATION):
    """Drive the reservoir for T steps; returns the N x T state history.

    ``inputs`` is a (k_inputs, T) array (a 1-D array is treated as one input
    dimension), or None for an autonomous run of T steps given as an int.
    Column t holds the state after consuming input column t.
    """
    x = np.asarray(x0, dtype=float)
    n = x.shape[0]
    if inputs is None:
        raise ValueError("inputs is required; pass a (k, T) array or use run_autonomous")
    u = np.asarray(inputs, dtype=float)
    if u.ndim == 1:
        u = u[np.newaxis, :]
    n_steps = u.shape[1]
    if n_steps < 1:
        raise ValueError("need at least one time step")
    op = _as_operator(w, n)
    w_in_matrix = None
    if w_in is not None:
        w_in_matrix = w_in.matrix if isinstance(w_in, InputWeights) else np.asarray(w_in)
    history = np.empty((n, n_steps))
    for t in range(n_steps):
        z = op @ x if op is not None else np.zeros(n)
        if w_in_matrix is not None:
            z = z + w_in_matrix @ u[:, t]
        x = activation(z, params)
        history[:, t] = x
    return history


def run_autonomous(w, x0, n_steps, params: ActivationParams = DEFAULT_ACTIVATION):
    """Zero-input run; returns the N x n_steps history."""
    x = np.asarray(x0, dtype=float)
    op = _as_operator(w, x.shape[0])
    history = np.empty((x.shape[0], n_steps))
    for t in range(n_steps):
        x = activation(op @ x, params)
        history[:, t] = x
    return history


def history_to_csv(history) -> str:
    """One row per time step, one column per node, 17 significant digits."""
    rows = []
    for t in range(history.shape[1]):
        rows.append(",".join(f"{v:.17g}" for v in history[:, t]))
    return "\n".join(rows) + "\n"
