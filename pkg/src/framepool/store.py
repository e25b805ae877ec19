"""On-disk formats.

* per-video features: CSV, one row per frame, ``m`` comma-separated
  floats, no header. Preprocessed matrices use the same layout with one
  row per feature component (``m`` rows, ``T`` columns).
* manifest: JSON Lines, one object per video with ``video_id``, ``path``
  (relative to the manifest), ``labels`` (event id -> "pos"/"neg") and
  ``split`` ("train"/"test"). Unknown fields are ignored.
* model: JSON document, see :func:`model_to_dict`.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (
    FrameFeatureSequence,
    FramePoolError,
    HyperplaneModel,
    LabeledDataset,
    PoolingWeights,
    ResampledFeatureMatrix,
    TraceRecord,
    TrainedModel,
)

SCHEMA_VERSION = 1
LABEL_VALUES = {"pos": 1, "neg": -1}
SPLITS = ("train", "test")


class FormatError(FramePoolError, ValueError):
    """Malformed input file."""


def _format_row(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def read_csv_matrix(path) -> np.ndarray:
    path = Path(path)
    try:
        text = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: not UTF-8: {exc}") from exc
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError(f"{path}: empty file")
    rows = []
    width = None
    for lineno, line in enumerate(lines, 1):
        cells = line.rstrip("\r").split(",")
        try:
            row = [float(c) for c in cells]
        except ValueError:
            raise FormatError(f"{path}:{lineno}: non-numeric cell in {line!r}") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise FormatError(
                f"{path}:{lineno}: expected {width} values, found {len(row)}"
            )
        if not all(np.isfinite(row)):
            raise FormatError(f"{path}:{lineno}: non-finite value")
        rows.append(row)
    return np.array(rows, dtype=np.float64)


def write_csv_matrix(path, matrix) -> None:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    text = "".join(_format_row(row) + "\n" for row in matrix)
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def read_video_features(path, video_id: str | None = None) -> FrameFeatureSequence:
    return FrameFeatureSequence(video_id or Path(path).stem, read_csv_matrix(path))


def write_video_features(path, seq: FrameFeatureSequence) -> None:
    write_csv_matrix(path, seq.frames)


def read_resampled(path, video_id: str | None = None) -> ResampledFeatureMatrix:
    return ResampledFeatureMatrix(video_id or Path(path).stem, read_csv_matrix(path))


def write_resampled(path, mat: ResampledFeatureMatrix) -> None:
    write_csv_matrix(path, mat.X)


@dataclass
class ManifestEntry:
    video_id: str
    path: str
    labels: dict[str, str] = field(default_factory=dict)
    split: str = "train"

    def to_json(self) -> str:
        return json.dumps(
            {"video_id": self.video_id, "path": self.path,
             "labels": dict(sorted(self.labels.items())), "split": self.split},
            ensure_ascii=False,
        )


@dataclass
class Manifest:
    entries: list[ManifestEntry]
    root: Path = Path(".")

    def resolve(self, entry: ManifestEntry) -> Path:
        return self.root / entry.path

    def events(self) -> list[str]:
        return sorted({ev for e in self.entries for ev in e.labels})

    def select(self, event: str, split: str | None = None) -> list[ManifestEntry]:
        return [
            e for e in self.entries
            if event in e.labels and (split is None or e.split == split)
        ]


def read_manifest(path) -> Manifest:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.jsonl"
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise FormatError(f"manifest not found: {path}") from None
    entries = []
    seen = set()
    for idx, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: entry {idx}: invalid JSON: {exc}") from None
        if not isinstance(obj, dict):
            raise FormatError(f"{path}: entry {idx}: expected an object")
        missing = [k for k in ("video_id", "path", "labels", "split") if k not in obj]
        if missing:
            raise FormatError(f"{path}: entry {idx}: missing field(s) {missing}")
        vid = str(obj["video_id"])
        if vid in seen:
            raise FormatError(f"{path}: entry {idx}: duplicate video_id {vid!r}")
        seen.add(vid)
        labels = obj["labels"]
        if not isinstance(labels, dict) or any(v not in LABEL_VALUES for v in labels.values()):
            raise FormatError(f"{path}: entry {idx}: labels must map event ids to 'pos'/'neg'")
        if obj["split"] not in SPLITS:
            raise FormatError(f"{path}: entry {idx}: split must be one of {SPLITS}")
        entries.append(ManifestEntry(vid, str(obj["path"]), dict(labels), obj["split"]))
    return Manifest(entries, path.parent)


def write_manifest(path, entries) -> None:
    text = "".join(e.to_json() + "\n" for e in entries)
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def load_dataset(manifest: Manifest, event: str, split: str | None = None) -> LabeledDataset:
    """Preprocessed matrices and ±1 labels of every video labelled for ``event``."""
    entries = manifest.select(event, split)
    mats, labels = [], []
    for e in entries:
        p = manifest.resolve(e)
        if not p.exists():
            raise FormatError(f"feature file for {e.video_id!r} not found: {p}")
        mats.append(read_resampled(p, e.video_id))
        labels.append(LABEL_VALUES[e.labels[event]])
    return LabeledDataset(tuple(mats), np.array(labels, dtype=np.float64), event)


def model_to_dict(trained: TrainedModel) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "event_id": trained.event_id,
        "w": [float(v) for v in trained.model.w],
        "b": float(trained.model.b),
        "theta": [float(v) for v in trained.weights.theta],
        "initial_objective": float(trained.initial_objective),
        "config": trained.config,
        "trace": [
            {
                "round": rec.round,
                "svm_objective": float(rec.svm_objective),
                "lp_objective": None if rec.lp_objective is None else float(rec.lp_objective),
                "theta": [float(v) for v in rec.theta],
            }
            for rec in trained.trace
        ],
    }


def model_from_dict(d: dict) -> TrainedModel:
    version = d.get("schema_version")
    if version != SCHEMA_VERSION:
        raise FormatError(
            f"model schema version {version!r} is not supported (this reader handles {SCHEMA_VERSION})"
        )
    try:
        return TrainedModel(
            event_id=d["event_id"],
            model=HyperplaneModel(np.array(d["w"], dtype=np.float64), d["b"]),
            # stored θ is already on the simplex; keep it bit-exact
            weights=PoolingWeights(np.array(d["theta"], dtype=np.float64)),
            trace=[
                TraceRecord(r["round"], np.array(r["theta"], dtype=np.float64),
                            r["svm_objective"], r["lp_objective"])
                for r in d["trace"]
            ],
            config=d["config"],
            initial_objective=d["initial_objective"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed model document: {exc!r}") from exc


def dumps_model(trained: TrainedModel) -> str:
    return json.dumps(model_to_dict(trained), indent=1, allow_nan=False) + "\n"


def write_model(path, trained: TrainedModel) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(dumps_model(trained), encoding="utf-8", newline="\n")
    os.replace(tmp, path)


def read_model(path) -> TrainedModel:
    path = Path(path)
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid model file: {exc}") from None
    if not isinstance(d, dict):
        raise FormatError(f"{path}: model file must hold a JSON object")
    return model_from_dict(d)
