"""Weighted pooling of sorted feature matrices and the fixed-weight baselines."""
from __future__ import annotations

import math

import numpy as np

from .core import DimensionError, HyperplaneModel, PoolingWeights, ResampledFeatureMatrix

BASELINES = ("average", "max", "median", "min")


def pool(X: ResampledFeatureMatrix | np.ndarray, weights: PoolingWeights) -> np.ndarray:
    X = X.X if isinstance(X, ResampledFeatureMatrix) else np.asarray(X, dtype=np.float64)
    if X.shape[-1] != weights.T:
        raise DimensionError(f"matrix has {X.shape[-1]} columns but theta has length {weights.T}")
    return X @ weights.theta


def median_index(T: int) -> int:
    """0-based column of the median indicator; upper middle for even T."""
    return math.ceil((T + 1) / 2) - 1


def baseline_weights(kind: str, T: int) -> PoolingWeights:
    if T < 2:
        raise ValueError(f"T must be >= 2, got {T}")
    theta = np.zeros(T)
    if kind == "average":
        theta[:] = 1.0 / T
    elif kind == "max":
        theta[0] = 1.0
    elif kind == "min":
        theta[-1] = 1.0
    elif kind == "median":
        theta[median_index(T)] = 1.0
    else:
        raise ValueError(f"unknown baseline {kind!r}; expected one of {BASELINES}")
    return PoolingWeights(theta)


def decision_score(
    model: HyperplaneModel, weights: PoolingWeights, X: ResampledFeatureMatrix | np.ndarray
) -> float:
    pooled = pool(X, weights)
    if pooled.shape != model.w.shape:
        raise DimensionError(f"pooled vector has length {pooled.size}, w has {model.w.size}")
    return float(model.w @ pooled + model.b)


def pool_tensor(tensor: np.ndarray, weights: PoolingWeights) -> np.ndarray:
    """Pool a stacked ``(n, m, T)`` array into ``(n, m)``."""
    if tensor.shape[-1] != weights.T:
        raise DimensionError(f"tensor has {tensor.shape[-1]} columns but theta has length {weights.T}")
    return tensor @ weights.theta
