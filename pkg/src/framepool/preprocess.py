"""Turn variable-length frame sequences into fixed ``m x T`` matrices.

Each feature component is sorted in descending order over frames, the
sorted values are interpolated over frame coordinates ``1..T_i`` and the
interpolant is sampled on the uniform grid ``t_k = 1 + (k-1)(T_i-1)/(T-1)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

from .core import FrameFeatureSequence, FramePoolError, ResampledFeatureMatrix

Mode = Literal["lagrange", "linear", "auto"]
MODES = ("lagrange", "linear", "auto")
DEFAULT_CUTOVER = 60


class ConfigError(FramePoolError, ValueError):
    pass


@dataclass(frozen=True)
class ResampleGrid:
    T_i: int
    T: int

    def __post_init__(self):
        if self.T < 2:
            raise ConfigError(f"target length T must be >= 2, got {self.T}")
        if self.T_i < 1:
            raise ConfigError(f"source length must be >= 1, got {self.T_i}")

    @property
    def points(self) -> np.ndarray:
        k = np.arange(self.T, dtype=np.float64)
        # numerator first so integer-landing points are exact
        return 1.0 + k * (self.T_i - 1) / (self.T - 1)


def sort_components_descending(seq: FrameFeatureSequence) -> np.ndarray:
    """Return ``(T_i, m)`` frames with every column sorted high to low."""
    return -np.sort(-seq.frames, axis=0, kind="stable")


def barycentric_weights(n: int) -> np.ndarray:
    """Weights for equispaced nodes 1..n: w_t = (-1)^t binom(n-1, t), rescaled."""
    w = np.ones(n)
    for t in range(1, n):
        w[t] = -w[t - 1] * (n - t) / t
    return w / np.abs(w).max()


def interpolant_eval(nodes, u) -> np.ndarray | float:
    """Evaluate the polynomial through ``(t, nodes[t-1])``, ``t = 1..T_i``.

    ``nodes`` may be 1-D or 2-D (rows interpolated independently along the
    last axis); ``u`` is a scalar or array inside ``[1, T_i]``.
    """
    nodes = np.asarray(nodes, dtype=np.float64)
    n = nodes.shape[-1]
    scalar = np.ndim(u) == 0
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    if n < 1:
        raise ValueError("need at least one node")
    if np.any(u < 1) or np.any(u > n) or not np.all(np.isfinite(u)):
        raise ValueError(f"evaluation point outside [1, {n}]: extrapolation is not allowed")
    if n == 1:
        out = np.broadcast_to(nodes[..., :1], nodes.shape[:-1] + u.shape).copy()
        return out[..., 0] if scalar else out

    x = np.arange(1, n + 1, dtype=np.float64)
    w = barycentric_weights(n)
    diff = u[:, None] - x[None, :]
    exact = diff == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        c = w / diff
    hit = exact.any(axis=1)
    c[hit] = 0.0
    num = nodes @ c.T
    den = c.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    if hit.any():
        idx = np.argmax(exact[hit], axis=1)
        out[..., hit] = nodes[..., idx]
    return out[..., 0] if scalar else out


def _linear_eval(nodes: np.ndarray, u: np.ndarray) -> np.ndarray:
    x = np.arange(1, nodes.shape[-1] + 1, dtype=np.float64)
    return np.stack([np.interp(u, x, row) for row in nodes])


def resolve_mode(mode: Mode, T_i: int, cutover: int = DEFAULT_CUTOVER) -> str:
    if mode not in MODES:
        raise ConfigError(f"unknown interpolation mode {mode!r}; expected one of {MODES}")
    if mode == "auto":
        return "lagrange" if T_i <= cutover else "linear"
    return mode


def resample(
    sorted_frames: np.ndarray,
    T: int,
    mode: Mode = "auto",
    cutover: int = DEFAULT_CUTOVER,
    video_id: str = "",
) -> ResampledFeatureMatrix:
    """Resample descending-sorted ``(T_i, m)`` frames to an ``(m, T)`` matrix.

    In ``lagrange`` mode rows are clipped to the node range and made
    non-increasing with a running minimum, since the polynomial can wiggle
    between nodes. Endpoints are nodes, so max and min columns stay exact.
    """
    sorted_frames = np.asarray(sorted_frames, dtype=np.float64)
    T_i = sorted_frames.shape[0]
    grid = ResampleGrid(T_i, T)
    rows = sorted_frames.T
    if T_i == 1:
        return ResampledFeatureMatrix(video_id, np.repeat(rows, T, axis=1))

    u = grid.points
    kind = resolve_mode(mode, T_i, cutover)
    if kind == "linear":
        X = _linear_eval(rows, u)
    else:
        X = interpolant_eval(rows, u)
        X = np.clip(X, rows.min(axis=1, keepdims=True), rows.max(axis=1, keepdims=True))
        X = np.minimum.accumulate(X, axis=1)
    return ResampledFeatureMatrix(video_id, X)


def preprocess_video(
    seq: FrameFeatureSequence, T: int = 20, mode: Mode = "auto", cutover: int = DEFAULT_CUTOVER
) -> ResampledFeatureMatrix:
    return resample(sort_components_descending(seq), T, mode, cutover, seq.video_id)


def preprocess_corpus(
    corpus: Iterable[FrameFeatureSequence],
    T: int = 20,
    mode: Mode = "auto",
    cutover: int = DEFAULT_CUTOVER,
) -> list[ResampledFeatureMatrix]:
    corpus = list(corpus)
    if T < 2:
        raise ConfigError(f"target length T must be >= 2, got {T}")
    resolve_mode(mode, 1, cutover)
    if corpus:
        dims = {}
        for seq in corpus:
            dims.setdefault(seq.dim, []).append(seq.video_id)
        if len(dims) > 1:
            majority = max(dims, key=lambda d: len(dims[d]))
            offenders = sorted(v for d, ids in dims.items() if d != majority for v in ids)
            raise FramePoolError(
                f"inconsistent feature dimension (expected {majority}): {offenders}"
            )
    return [preprocess_video(seq, T, mode, cutover) for seq in corpus]
