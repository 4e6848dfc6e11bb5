"""Linear readout training (SVD pseudo-inverse), step readout, and the
squared-correlation performance metric."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

# singular values below rel_tol * sigma_max are treated as zero
PINV_REL_TOL = 1e-10


@dataclass(frozen=True)
class ReadoutLayer:
    """Trained readout matrix, one row per readout neuron."""

    w_out: np.ndarray

    @property
    def n_readouts(self):
        return self.w_out.shape[0]


@dataclass(frozen=True)
class TrainingSet:
    """Design matrix X of [state:input] columns and the target matrix."""

    x: np.ndarray
    y_target: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y_target, dtype=float)
        if x.ndim != 2 or y.ndim != 2:
            raise ValueError("X and Y_tar must be 2-D")
        if x.shape[1] != y.shape[1]:
            raise ValueError(
                f"X has {x.shape[1]} columns but Y_tar has {y.shape[1]}"
            )
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y_target", y)
        if x.shape[1] < x.shape[0]:
            warnings.warn(
                f"training set has fewer samples ({x.shape[1]}) than design rows "
                f"({x.shape[0]}); the least-squares problem is underdetermined",
                stacklevel=2,
            )


def train_readout(ts: TrainingSet, rel_tol=PINV_REL_TOL, ridge_lambda=0.0) -> ReadoutLayer:
    """Solve W_out = Y_tar X^+ (minimum Frobenius residual).

    ridge_lambda > 0 switches to the regularized normal equations; the
    default 0 keeps the plain pseudo-inverse solution.
    """
    x, y = ts.x, ts.y_target
    if not np.any(x):
        raise ValueError("design matrix is identically zero")
    if ridge_lambda > 0.0:
        gram = x @ x.T + ridge_lambda * np.eye(x.shape[0])
        w_out = np.linalg.solve(gram, x @ y.T).T
    else:
        w_out = y @ np.linalg.pinv(x, rcond=rel_tol)
    return ReadoutLayer(w_out=w_out)


def readout_continuous(layer: ReadoutLayer, x, u=None):
    """Linear readout W_out [x:u] (the pre-threshold value)."""
    x = np.asarray(x, dtype=float)
    v = x if u is None else np.concatenate([x, np.atleast_1d(np.asarray(u, dtype=float))])
    if layer.w_out.shape[1] != v.shape[0]:
        raise ValueError(
            f"readout expects {layer.w_out.shape[1]} features, got {v.shape[0]}"
        )
    return layer.w_out @ v


def readout_step(y_linear):
    """Threshold at 0.5: values <= 0.5 map to 0, values > 0.5 map to 1."""
    return (np.asarray(y_linear, dtype=float) > 0.5).astype(np.int64)


def r_squared(target, predicted) -> float:
    """Squared Pearson correlation between a target and a predicted series.

    A zero-variance prediction carries no signal and scores 0. A
    zero-variance target is rejected: task inputs are random, so that is a
    harness bug rather than a legitimate score.
    """
    t = np.asarray(target, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if t.shape != p.shape or t.ndim != 1:
        raise ValueError("target and predicted must be 1-D series of equal length")
    if len(t) < 2:
        raise ValueError("need at least two samples")
    t_var = np.var(t)
    if t_var == 0.0:
        raise ValueError("target series has zero variance")
    p_var = np.var(p)
    if p_var == 0.0:
        return 0.0
    cov = np.mean((t - t.mean()) * (p - p.mean()))
    return float(min(1.0, cov * cov / (t_var * p_var)))
