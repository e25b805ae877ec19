"""Alternating minimization of the joint objective over (w, b) and θ.

Round ``r`` trains the SVM on data pooled with θ_r, then solves the θ
linear program for that SVM to get θ_{r+1}. The last round only trains the
SVM, so the returned (w, b) is optimal for the returned θ. Neither
half-step can increase the joint objective, up to the SVM duality-gap
tolerance.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import (
    FramePoolError,
    HyperplaneModel,
    LabeledDataset,
    PoolingWeights,
    TraceRecord,
    TrainedModel,
    joint_objective,
)
from .lp import build_theta_lp, solve_theta_lp
from .pooling import pool_tensor
from .svm import SvmConfig, train_svm_arrays

log = logging.getLogger(__name__)


class TrainingError(FramePoolError, RuntimeError):
    pass


@dataclass(frozen=True)
class TrainerConfig:
    T: int = 20
    iterations: int = 100
    C: float = 1.0
    seed: int = 0
    early_stop_tol: float = 1e-7
    svm: SvmConfig = field(default_factory=SvmConfig)

    def __post_init__(self):
        if self.T < 2:
            raise ValueError(f"T must be >= 2, got {self.T}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.C <= 0 or self.early_stop_tol < 0:
            raise ValueError("C must be positive and early_stop_tol non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.svm.C != self.C:
            object.__setattr__(self, "svm", SvmConfig(
                C=self.C, tolerance=self.svm.tolerance,
                max_passes=self.svm.max_passes, standardize=self.svm.standardize))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainerConfig":
        d = dict(d)
        svm = SvmConfig(**d.pop("svm", {}))
        return cls(svm=svm, **d)


def init_theta(T: int, seed: int) -> PoolingWeights:
    if T < 2:
        raise ValueError(f"T must be >= 2, got {T}")
    u = np.random.default_rng(seed).uniform(0.0, 1.0, size=T)
    # uniform(0,1) can return exactly 0
    u = np.where(u > 0, u, np.finfo(float).tiny)
    return PoolingWeights(u / u.sum())


def train_event(dataset: LabeledDataset, config: TrainerConfig = TrainerConfig()) -> TrainedModel:
    dataset.check_trainable()
    if dataset.T != config.T:
        raise ValueError(f"dataset has T={dataset.T} but config expects T={config.T}")
    C = config.C
    y = dataset.labels
    weights = init_theta(config.T, config.seed)
    initial = joint_objective(dataset, HyperplaneModel.zero(dataset.m), weights, C)
    trace: list[TraceRecord] = []
    prev_lp = None
    stop_after = config.iterations

    r = 0
    while True:
        r += 1
        try:
            model = train_svm_arrays(pool_tensor(dataset.tensor, weights), y, config.svm).model
        except FramePoolError as exc:
            raise TrainingError(f"SVM step failed in round {r}: {exc}") from exc
        svm_obj = joint_objective(dataset, model, weights, C)
        record = TraceRecord(r, weights.theta, svm_obj)
        trace.append(record)
        if r >= stop_after:
            break
        try:
            sol = solve_theta_lp(build_theta_lp(dataset, model))
        except FramePoolError as exc:
            raise TrainingError(f"LP step failed in round {r}: {exc}") from exc
        weights = sol.weights
        record.lp_objective = joint_objective(dataset, model, weights, C)
        log.debug("round %d: svm %.10g lp %.10g", r, svm_obj, record.lp_objective)
        if (
            config.early_stop_tol > 0
            and prev_lp is not None
            and prev_lp - record.lp_objective < config.early_stop_tol
        ):
            # one final SVM round on the new θ
            stop_after = r + 1
        prev_lp = record.lp_objective

    return TrainedModel(
        event_id=dataset.event_id,
        model=model,
        weights=weights,
        trace=trace,
        config=config.to_dict(),
        initial_objective=initial,
    )
