"""Average precision per event and mean average precision across events."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .core import FramePoolError, LabeledDataset, TrainedModel
from .pooling import pool_tensor


class MetricError(FramePoolError, ValueError):
    pass


@dataclass(frozen=True)
class ScoredItem:
    video_id: str
    score: float
    label: int

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise ValueError(f"non-finite score for {self.video_id!r}")
        if self.label not in (1, -1):
            raise ValueError(f"label must be +1 or -1, got {self.label!r}")


def rank_items(items: Iterable[ScoredItem]) -> list[ScoredItem]:
    """Descending score; ties broken by ascending video_id."""
    return sorted(items, key=lambda it: (-it.score, it.video_id))


def average_precision(items: Iterable[ScoredItem]) -> float:
    """Non-interpolated AP: mean of precision@rank over the positive ranks."""
    ranked = rank_items(items)
    terms = []
    for rank, it in enumerate(ranked, 1):
        if it.label == 1:
            terms.append((len(terms) + 1) / rank)
    if not terms:
        raise MetricError("average precision is undefined without positive items")
    # fsum is correctly rounded, so the result does not depend on summation order
    return math.fsum(terms) / len(terms)


def mean_ap(per_event: Mapping[str, float]) -> float:
    if not per_event:
        raise MetricError("mean AP over zero events")
    return float(np.mean([per_event[k] for k in sorted(per_event)]))


@dataclass(frozen=True)
class EvaluationReport:
    event_id: str
    ap: float
    ranked: list[ScoredItem]

    def to_csv(self) -> str:
        return ranked_csv(self.ranked)


def ranked_csv(ranked: list[ScoredItem]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["rank", "video_id", "score", "label"])
    for r, it in enumerate(ranked, 1):
        writer.writerow([r, it.video_id, repr(float(it.score)), it.label])
    return buf.getvalue()


def score_dataset(model, weights, dataset: LabeledDataset) -> list[ScoredItem]:
    scores = pool_tensor(dataset.tensor, weights) @ model.w + model.b
    return [
        ScoredItem(vid, float(s), int(lab))
        for vid, s, lab in zip(dataset.video_ids, scores, dataset.labels)
    ]


def evaluate_model(trained: TrainedModel, test: LabeledDataset) -> EvaluationReport:
    items = score_dataset(trained.model, trained.weights, test)
    ranked = rank_items(items)
    return EvaluationReport(test.event_id or trained.event_id, average_precision(ranked), ranked)
