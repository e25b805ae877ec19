"""Shared domain types and the joint pooling/classifier objective."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

SIMPLEX_ATOL = 1e-9


class FramePoolError(Exception):
    """Base class for all package errors."""


class DimensionError(FramePoolError, ValueError):
    pass


def _frozen(a: Any, ndim: int, name: str) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    if arr.ndim != ndim:
        raise DimensionError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FrameFeatureSequence:
    """Raw per-frame features of one video, shape ``(T_i, m)``."""

    video_id: str
    frames: np.ndarray

    def __post_init__(self):
        frames = _frozen(self.frames, 2, f"frames of {self.video_id!r}")
        if frames.shape[0] < 1 or frames.shape[1] < 1:
            raise DimensionError(f"video {self.video_id!r} has empty frames {frames.shape}")
        object.__setattr__(self, "frames", frames)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def dim(self) -> int:
        return self.frames.shape[1]


@dataclass(frozen=True)
class ResampledFeatureMatrix:
    """Sorted, resampled features of one video, shape ``(m, T)``."""

    video_id: str
    X: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "X", _frozen(self.X, 2, f"matrix of {self.video_id!r}"))

    @property
    def shape(self) -> tuple[int, int]:
        return self.X.shape


@dataclass(frozen=True)
class PoolingWeights:
    theta: np.ndarray

    def __post_init__(self):
        theta = _frozen(self.theta, 1, "theta")
        if theta.size < 1:
            raise DimensionError("theta is empty")
        if theta.min() < 0:
            raise ValueError(f"theta has negative entry {theta.min()!r}")
        if abs(theta.sum() - 1.0) > SIMPLEX_ATOL:
            raise ValueError(f"theta sums to {theta.sum()!r}, expected 1")
        object.__setattr__(self, "theta", theta)

    @property
    def T(self) -> int:
        return self.theta.size

    @classmethod
    def from_raw(cls, theta: np.ndarray) -> "PoolingWeights":
        """Clamp tiny negatives to zero and renormalize onto the simplex."""
        theta = np.maximum(np.asarray(theta, dtype=np.float64), 0.0)
        return cls(theta / theta.sum())


@dataclass(frozen=True)
class HyperplaneModel:
    w: np.ndarray
    b: float

    def __post_init__(self):
        object.__setattr__(self, "w", _frozen(self.w, 1, "w"))
        b = float(self.b)
        if not np.isfinite(b):
            raise ValueError("b is not finite")
        object.__setattr__(self, "b", b)

    @classmethod
    def zero(cls, m: int) -> "HyperplaneModel":
        return cls(np.zeros(m), 0.0)


@dataclass(frozen=True)
class LabeledDataset:
    """Matrices with ±1 labels for one event; all matrices share ``(m, T)``."""

    matrices: tuple[ResampledFeatureMatrix, ...]
    labels: np.ndarray
    event_id: str = ""
    tensor: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        matrices = tuple(self.matrices)
        labels = np.asarray(self.labels, dtype=np.float64)
        if labels.shape != (len(matrices),):
            raise DimensionError(
                f"{len(matrices)} matrices but labels have shape {labels.shape}"
            )
        if not np.all(np.isin(labels, (-1.0, 1.0))):
            raise ValueError("labels must be +1 or -1")
        if matrices:
            shape = matrices[0].shape
            bad = [mat.video_id for mat in matrices if mat.shape != shape]
            if bad:
                raise DimensionError(f"matrices differ from shape {shape}: {bad}")
            tensor = np.stack([mat.X for mat in matrices])
        else:
            tensor = np.zeros((0, 0, 0))
        labels.setflags(write=False)
        tensor.setflags(write=False)
        object.__setattr__(self, "matrices", matrices)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "tensor", tensor)

    @classmethod
    def from_pairs(
        cls, items: Sequence[tuple[ResampledFeatureMatrix, int]], event_id: str = ""
    ) -> "LabeledDataset":
        return cls(tuple(x for x, _ in items), np.array([y for _, y in items]), event_id)

    def __len__(self) -> int:
        return len(self.matrices)

    @property
    def m(self) -> int:
        return self.tensor.shape[1]

    @property
    def T(self) -> int:
        return self.tensor.shape[2]

    @property
    def video_ids(self) -> list[str]:
        return [mat.video_id for mat in self.matrices]

    def check_trainable(self) -> None:
        if len(self) < 2 or not (np.any(self.labels > 0) and np.any(self.labels < 0)):
            raise ValueError(
                f"event {self.event_id!r} needs at least one positive and one negative item"
            )


@dataclass
class TraceRecord:
    """One round of the alternation.

    ``theta`` is the pooling vector the round's SVM step was trained on.
    ``lp_objective`` is None for the final round, which has no θ update.
    """

    round: int
    theta: np.ndarray
    svm_objective: float
    lp_objective: float | None = None


@dataclass
class TrainedModel:
    event_id: str
    model: HyperplaneModel
    weights: PoolingWeights
    trace: list[TraceRecord]
    config: dict
    initial_objective: float = float("nan")

    def objective_sequence(self) -> list[float]:
        """Joint objective after every half-step, starting from the zero model."""
        seq = [self.initial_objective]
        for rec in self.trace:
            seq.append(rec.svm_objective)
            if rec.lp_objective is not None:
                seq.append(rec.lp_objective)
        return seq


def _check_dims(dataset: LabeledDataset, model: HyperplaneModel, weights: PoolingWeights):
    if len(dataset) == 0:
        raise DimensionError("dataset is empty")
    if model.w.size != dataset.m:
        raise DimensionError(
            f"w has length {model.w.size} but item {dataset.matrices[0].video_id!r} "
            f"has {dataset.m} feature components"
        )
    if weights.T != dataset.T:
        raise DimensionError(
            f"theta has length {weights.T} but item {dataset.matrices[0].video_id!r} "
            f"has {dataset.T} columns"
        )


def hinge_terms(dataset: LabeledDataset, model: HyperplaneModel, weights: PoolingWeights) -> np.ndarray:
    _check_dims(dataset, model, weights)
    scores = np.einsum("m,nmt,t->n", model.w, dataset.tensor, weights.theta) + model.b
    return np.maximum(0.0, 1.0 - dataset.labels * scores)


def joint_objective(
    dataset: LabeledDataset, model: HyperplaneModel, weights: PoolingWeights, C: float = 1.0
) -> float:
    """C * sum_i hinge(1 - y_i (w' X_i theta + b)) + 0.5 * w'w."""
    if C <= 0:
        raise ValueError("C must be positive")
    return float(C * hinge_terms(dataset, model, weights).sum() + 0.5 * model.w @ model.w)
