"""``framepool`` command line.

Exit codes: 0 success, 2 bad input or usage, 1 internal failure.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import store
from .core import FramePoolError
from .evaluation import (
    MetricError,
    ScoredItem,
    average_precision,
    mean_ap,
    rank_items,
    ranked_csv,
    score_dataset,
)
from .pooling import BASELINES, baseline_weights, pool_tensor
from .preprocess import MODES, ConfigError, preprocess_video
from .svm import SvmConfig, train_svm_arrays
from .synth import SynthSpec, generate, split_assignment
from .trainer import TrainerConfig, train_event

log = logging.getLogger("framepool")

EXIT_INTERNAL = 1
EXIT_USAGE = 2


class UsageError(FramePoolError):
    pass


def _frames(text: str) -> int:
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError("T must be at least 2")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def worker_count(requested: int | None) -> int:
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("FRAMEPOOL_THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise UsageError(f"FRAMEPOOL_THREADS must be an integer, got {cap!r}") from None
    return max(1, n)


# synth ---------------------------------------------------------------------

def cmd_synth(args) -> int:
    spec = SynthSpec(
        n_pos=args.n_pos, n_neg=args.n_neg, m=args.dim,
        frames_min=args.frames_min, frames_max=args.frames_max,
        signal_component=args.signal_component, signal_quantile=args.quantile,
        signal_strength=args.strength, noise_sigma=args.noise, seed=args.seed,
    )
    videos = generate(spec)
    splits = split_assignment(videos, args.test_fraction)
    out = Path(args.out)
    (out / "videos").mkdir(parents=True, exist_ok=True)
    entries = []
    for v, split in zip(videos, splits):
        rel = f"videos/{v.sequence.video_id}.csv"
        store.write_video_features(out / rel, v.sequence)
        label = "pos" if v.label > 0 else "neg"
        entries.append(store.ManifestEntry(v.sequence.video_id, rel, {args.event: label}, split))
    store.write_manifest(out / "manifest.jsonl", entries)
    print(f"wrote {len(entries)} videos to {out}")
    return 0


# preprocess ----------------------------------------------------------------

def cmd_preprocess(args) -> int:
    manifest = store.read_manifest(args.manifest)
    out = Path(args.out_dir)
    (out / "features").mkdir(parents=True, exist_ok=True)
    entries = []
    dims = {}
    for e in manifest.entries:
        seq = store.read_video_features(manifest.resolve(e), e.video_id)
        dims[e.video_id] = seq.dim
        mat = preprocess_video(seq, T=args.frames, mode=args.mode)
        rel = f"features/{e.video_id}.csv"
        store.write_resampled(out / rel, mat)
        entries.append(store.ManifestEntry(e.video_id, rel, dict(e.labels), e.split))
    if len(set(dims.values())) > 1:
        common = max(set(dims.values()), key=list(dims.values()).count)
        bad = sorted(v for v, d in dims.items() if d != common)
        raise store.FormatError(f"inconsistent feature dimension; offending videos: {bad}")
    store.write_manifest(out / "manifest.jsonl", entries)
    print(f"preprocessed {len(entries)} videos to T={args.frames} in {out}")
    return 0


# train ---------------------------------------------------------------------

def _train_one(data_dir: str, event: str, config: TrainerConfig, out_path: str) -> tuple[str, float, list[float]]:
    manifest = store.read_manifest(data_dir)
    dataset = store.load_dataset(manifest, event, "train")
    if len(dataset.matrices) == 0:
        raise UsageError(f"no training videos labelled for event {event!r}")
    if dataset.T != config.T:
        config = TrainerConfig.from_dict({**config.to_dict(), "T": dataset.T})
    trained = train_event(dataset, config)
    store.write_model(out_path, trained)
    final = trained.objective_sequence()[-1]
    return event, final, [float(t) for t in trained.weights.theta]


def _theta_summary(theta) -> str:
    theta = np.asarray(theta)
    top = np.argsort(-theta, kind="stable")[:3]
    parts = ", ".join(f"theta_{k + 1}={theta[k]:.4f}" for k in top if theta[k] > 0)
    return f"argmax k={int(top[0]) + 1}; {parts}"


def cmd_train(args) -> int:
    config = TrainerConfig(
        iterations=args.iters, C=args.C, seed=args.seed,
        early_stop_tol=args.early_stop_tol,
    )
    manifest = store.read_manifest(args.data_dir)
    if args.event == "all":
        events = manifest.events()
        if not events:
            raise UsageError("manifest labels no events")
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        jobs = [(str(args.data_dir), ev, config, str(out / f"{ev}.json")) for ev in events]
        workers = min(worker_count(args.workers), len(jobs))
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_train_one, *zip(*jobs)))
        else:
            results = [_train_one(*job) for job in jobs]
    else:
        if args.event not in manifest.events():
            raise UsageError(f"no videos are labelled for event {args.event!r}")
        out = Path(args.out)
        if out.parent != Path(""):
            out.parent.mkdir(parents=True, exist_ok=True)
        results = [_train_one(str(args.data_dir), args.event, config, str(out))]
    for event, final, theta in results:
        print(f"{event}: final objective {final:.10g}; {_theta_summary(theta)}")
    return 0


# predict / evaluate ----------------------------------------------------------

def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def cmd_predict(args) -> int:
    trained = store.read_model(args.model)
    manifest = store.read_manifest(args.data_dir)
    split = None if args.split == "all" else args.split
    dataset = store.load_dataset(manifest, trained.event_id, split)
    if len(dataset.matrices) == 0:
        raise UsageError(f"no {args.split} videos labelled for event {trained.event_id!r}")
    if dataset.m != trained.model.w.size or dataset.T != trained.weights.T:
        raise UsageError(
            f"data has m={dataset.m}, T={dataset.T}; model expects "
            f"m={trained.model.w.size}, T={trained.weights.T}"
        )
    ranked = rank_items(score_dataset(trained.model, trained.weights, dataset))
    _write_or_print(ranked_csv(ranked), args.out)
    return 0


def read_scores(path) -> list[ScoredItem]:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"video_id", "score", "label"} <= set(reader.fieldnames):
                raise store.FormatError(f"{path}: expected header with video_id,score,label")
            items = []
            for lineno, row in enumerate(reader, 2):
                try:
                    items.append(ScoredItem(row["video_id"], float(row["score"]), int(row["label"])))
                except (TypeError, ValueError) as exc:
                    raise store.FormatError(f"{path}:{lineno}: {exc}") from None
    except FileNotFoundError:
        raise store.FormatError(f"score file not found: {path}") from None
    return items


def cmd_evaluate(args) -> int:
    aps = {}
    for index, path in enumerate(args.scores):
        ap = average_precision(read_scores(path))
        aps[index] = ap
        print(f"AP {path} {ap!r}" if len(args.scores) > 1 else repr(ap))
    if len(aps) > 1:
        print(f"mAP {mean_ap(aps)!r}")
    return 0


# baseline -----------------------------------------------------------------

def cmd_baseline(args) -> int:
    manifest = store.read_manifest(args.data_dir)
    train = store.load_dataset(manifest, args.event, "train")
    test = store.load_dataset(manifest, args.event, "test")
    if len(train.matrices) == 0 or len(test.matrices) == 0:
        raise UsageError(f"event {args.event!r} needs both train and test videos")
    train.check_trainable()
    weights = baseline_weights(args.method, train.T)
    sol = train_svm_arrays(pool_tensor(train.tensor, weights), train.labels, SvmConfig(C=args.C))
    items = score_dataset(sol.model, weights, test)
    if args.out:
        _write_or_print(ranked_csv(rank_items(items)), args.out)
    print(f"{args.method} AP {average_precision(items):.6f}")
    return 0


# weights ------------------------------------------------------------------

def weights_csv(trained) -> str:
    lines = ["iteration,k,theta_k"]
    for rec in trained.trace:
        lines += [f"{rec.round},{k},{float(v)!r}" for k, v in enumerate(rec.theta, 1)]
    return "\n".join(lines) + "\n"


def cmd_weights(args) -> int:
    _write_or_print(weights_csv(store.read_model(args.model)), args.out)
    return 0


# parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="framepool", description="Learned order-statistic frame pooling for video event detection.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging to stderr")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("synth", help="write a seeded synthetic corpus")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--event", default="SYN")
    s.add_argument("--n-pos", type=_positive_int, default=50)
    s.add_argument("--n-neg", type=_positive_int, default=50)
    s.add_argument("--dim", type=_positive_int, default=20, help="feature dimension m")
    s.add_argument("--frames-min", type=_positive_int, default=20)
    s.add_argument("--frames-max", type=_positive_int, default=60)
    s.add_argument("--signal-component", type=_positive_int, default=1)
    s.add_argument("--quantile", type=float, default=0.5)
    s.add_argument("--strength", type=float, default=2.0)
    s.add_argument("--noise", type=float, default=1.0)
    s.add_argument("--test-fraction", type=float, default=0.5)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("preprocess", help="sort and resample raw frame features")
    s.add_argument("manifest", help="manifest.jsonl (or its directory)")
    s.add_argument("out_dir")
    s.add_argument("--frames", type=_frames, default=20, help="target column count T (default 20)")
    s.add_argument("--mode", choices=MODES, default="auto")
    s.set_defaults(func=cmd_preprocess)

    s = sub.add_parser("train", help="learn (w, b, theta) for one event or all")
    s.add_argument("data_dir", help="preprocessed directory")
    s.add_argument("--event", required=True, help="event id, or 'all'")
    s.add_argument("--iters", type=_positive_int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--C", type=_positive_float, default=1.0)
    s.add_argument("--early-stop-tol", type=float, default=1e-7)
    s.add_argument("--out", default="model.json", help="model file, or a directory with --event all")
    s.add_argument("--workers", type=_positive_int, default=None)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("predict", help="score videos with a trained model")
    s.add_argument("model")
    s.add_argument("data_dir")
    s.add_argument("--split", choices=("train", "test", "all"), default="test")
    s.add_argument("--out", help="CSV path (default stdout)")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("evaluate", help="AP per score file, mAP across files")
    s.add_argument("scores", nargs="+")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("baseline", help="fixed pooling + SVM, evaluated on the test split")
    s.add_argument("data_dir")
    s.add_argument("--event", required=True)
    s.add_argument("--method", choices=BASELINES, required=True)
    s.add_argument("--C", type=_positive_float, default=1.0)
    s.add_argument("--out", help="write ranked scores CSV here")
    s.set_defaults(func=cmd_baseline)

    s = sub.add_parser("weights", help="dump the theta trace as CSV")
    s.add_argument("model")
    s.add_argument("--out", help="CSV path (default stdout)")
    s.set_defaults(func=cmd_weights)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (store.FormatError, UsageError, ConfigError, MetricError, ValueError) as exc:
        print(f"framepool {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - last-resort reporting
        log.debug("internal error", exc_info=True)
        print(f"framepool {args.command}: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
