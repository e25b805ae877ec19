"""Time the compiled and pure-Python kernels on representative workloads.

    python benchmarks/bench_kernels.py [--repeat 5]

Workloads: one SMO warm start (n=200, m=20), one θ LP solve (n=200, T=20)
and a 10-round training run, each on a seeded synthetic corpus.
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from framepool import _kernels
from framepool.core import HyperplaneModel
from framepool.lp import build_theta_lp, solve_theta_lp
from framepool.pooling import baseline_weights, pool_tensor
from framepool.synth import SynthSpec, to_datasets
from framepool.trainer import TrainerConfig, train_event


def _use(impl):
    for name in ("smo", "simplex_iterate", "pivot"):
        setattr(_kernels, name, getattr(impl, name))


def _time(fn, repeat):
    samples = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    train, _ = to_datasets(SynthSpec(n_pos=100, n_neg=100, m=20, seed=0), test_fraction=0.0)
    X = np.ascontiguousarray(pool_tensor(train.tensor, baseline_weights("average", 20)))
    y = np.ascontiguousarray(train.labels)
    model = HyperplaneModel(np.random.default_rng(0).normal(size=20), 0.0)
    problem = build_theta_lp(train, model)
    config = TrainerConfig(iterations=10, early_stop_tol=0.0)

    def smo():
        _kernels.smo(X, y, 1.0, 1e-3, 20 * len(y), np.zeros(len(y)), np.zeros(X.shape[1]))

    workloads = {
        "smo warm start (n=200, m=20)": smo,
        "theta LP solve (n=200, T=20)": lambda: solve_theta_lp(problem),
        "train_event, 10 rounds": lambda: train_event(train, config),
    }
    backends = _kernels.available_backends()
    saved = {name: getattr(_kernels, name) for name in ("smo", "simplex_iterate", "pivot")}
    results = {}
    try:
        for bname, impl in backends.items():
            _use(impl)
            for wname, fn in workloads.items():
                results[wname, bname] = _time(fn, args.repeat)
    finally:
        for name, fn in saved.items():
            setattr(_kernels, name, fn)

    names = list(backends)
    header = f"{'workload':32s}" + "".join(f"{n:>12s}" for n in names)
    if "cython" in backends:
        header += f"{'speedup':>10s}"
    print(header)
    for wname in workloads:
        row = f"{wname:32s}" + "".join(f"{results[wname, n] * 1e3:10.2f}ms" for n in names)
        if "cython" in backends:
            row += f"{results[wname, 'python'] / results[wname, 'cython']:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
