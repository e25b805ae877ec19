"""Seeded synthetic corpora with class signal planted at an order statistic."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .core import FrameFeatureSequence, LabeledDataset
from .preprocess import preprocess_video


@dataclass(frozen=True)
class SynthSpec:
    n_pos: int = 50
    n_neg: int = 50
    m: int = 20
    frames_min: int = 20
    frames_max: int = 60
    signal_component: int = 1
    signal_quantile: float = 0.5
    signal_strength: float = 2.0
    noise_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_pos < 1 or self.n_neg < 1:
            raise ValueError("n_pos and n_neg must be >= 1")
        if self.m < 1 or not 1 <= self.signal_component <= self.m:
            raise ValueError(f"signal_component must lie in 1..{self.m}")
        if not 0 < self.signal_quantile < 1:
            raise ValueError("signal_quantile must lie in (0, 1)")
        if not 1 <= self.frames_min <= self.frames_max:
            raise ValueError("need 1 <= frames_min <= frames_max")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SynthVideo:
    sequence: FrameFeatureSequence
    label: int


def signal_rank(q: float, n_frames: int) -> int:
    """1-based descending rank that receives the signal."""
    return max(1, math.ceil(q * n_frames))


def generate(spec: SynthSpec) -> list[SynthVideo]:
    """Positives first, then negatives; ids ``pos0000``, ``neg0000``, ...

    Every entry is i.i.d. Gaussian noise with standard deviation
    ``noise_sigma``. In each positive video the frame holding the
    ``signal_rank``-th largest value of the signal component gets
    ``signal_strength`` added to that component.
    """
    rng = np.random.default_rng(spec.seed)
    j = spec.signal_component - 1
    out = []
    for label, count, prefix in ((1, spec.n_pos, "pos"), (-1, spec.n_neg, "neg")):
        for i in range(count):
            T_i = int(rng.integers(spec.frames_min, spec.frames_max + 1))
            frames = rng.normal(0.0, spec.noise_sigma, size=(T_i, spec.m))
            if label > 0:
                order = np.argsort(-frames[:, j], kind="stable")
                frames[order[signal_rank(spec.signal_quantile, T_i) - 1], j] += spec.signal_strength
            out.append(SynthVideo(FrameFeatureSequence(f"{prefix}{i:04d}", frames), label))
    return out


def split_assignment(videos: list[SynthVideo], test_fraction: float) -> list[str]:
    """Deterministic per-class split: every k-th video of each class goes to test."""
    if not 0 <= test_fraction < 1:
        raise ValueError("test_fraction must lie in [0, 1)")
    splits = []
    acc = {1: 0.0, -1: 0.0}
    for v in videos:
        acc[v.label] += test_fraction
        if acc[v.label] >= 1.0 - 1e-12:
            acc[v.label] -= 1.0
            splits.append("test")
        else:
            splits.append("train")
    return splits


def to_datasets(
    spec: SynthSpec,
    T: int = 20,
    test_fraction: float = 0.5,
    mode: str = "auto",
    event_id: str = "SYN",
) -> tuple[LabeledDataset, LabeledDataset | None]:
    """Generate, preprocess and split a corpus into train and test datasets.

    The test dataset is None when ``test_fraction`` is 0.
    """
    videos = generate(spec)
    splits = split_assignment(videos, test_fraction)
    parts: dict[str, list] = {"train": [], "test": []}
    for v, split in zip(videos, splits):
        parts[split].append((preprocess_video(v.sequence, T=T, mode=mode), v.label))
    train = LabeledDataset.from_pairs(parts["train"], event_id)
    test = LabeledDataset.from_pairs(parts["test"], event_id) if parts["test"] else None
    return train, test
