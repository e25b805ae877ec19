import numpy as np
import pytest

from framepool.core import HyperplaneModel, joint_objective
from framepool.synth import SynthSpec, to_datasets
from framepool.trainer import TrainerConfig, TrainingError, init_theta, train_event


@pytest.fixture(scope="module")
def small_corpus():
    train, _ = to_datasets(SynthSpec(n_pos=20, n_neg=20, m=5, seed=11), T=20, test_fraction=0.0)
    return train


def test_init_theta():
    a, b = init_theta(20, 5), init_theta(20, 5)
    assert np.array_equal(a.theta, b.theta)
    assert abs(a.theta.sum() - 1) <= 1e-12 and np.all(a.theta > 0)
    assert not np.array_equal(a.theta, init_theta(20, 6).theta)


def test_single_round_returns_initial_theta(small_corpus):
    trained = train_event(small_corpus, TrainerConfig(iterations=1, seed=3))
    assert len(trained.trace) == 1 and trained.trace[0].lp_objective is None
    assert np.array_equal(trained.weights.theta, init_theta(20, 3).theta)


def test_trace_is_monotone_and_consistent(small_corpus):
    config = TrainerConfig(iterations=15, seed=1, early_stop_tol=0.0)
    trained = train_event(small_corpus, config)
    seq = trained.objective_sequence()
    assert len(seq) == 1 + 15 + 14
    assert np.all(np.diff(seq) <= 1e-6)
    last = trained.trace[-1]
    assert np.array_equal(last.theta, trained.weights.theta)
    assert joint_objective(small_corpus, trained.model, trained.weights) == pytest.approx(last.svm_objective)


def test_early_stop_finishes_with_svm_round(small_corpus):
    trained = train_event(small_corpus, TrainerConfig(iterations=100, seed=2, early_stop_tol=1e-7))
    assert len(trained.trace) < 100
    assert trained.trace[-1].lp_objective is None
    assert all(rec.lp_objective is not None for rec in trained.trace[:-1])


def test_reproducible(small_corpus):
    config = TrainerConfig(iterations=10, seed=4)
    a, b = train_event(small_corpus, config), train_event(small_corpus, config)
    assert np.array_equal(a.model.w, b.model.w) and a.model.b == b.model.b
    assert np.array_equal(a.weights.theta, b.weights.theta)


def test_config_validation_and_round_trip():
    with pytest.raises(ValueError):
        TrainerConfig(T=1)
    with pytest.raises(ValueError):
        TrainerConfig(iterations=0)
    cfg = TrainerConfig(C=2.5, seed=9)
    assert cfg.svm.C == 2.5
    assert TrainerConfig.from_dict(cfg.to_dict()) == cfg


def test_errors_and_mismatch(small_corpus):
    with pytest.raises(ValueError, match="T=20"):
        train_event(small_corpus, TrainerConfig(T=10))
    one_class = type(small_corpus)(small_corpus.matrices[:3], np.ones(3), "E")
    with pytest.raises(ValueError):
        train_event(one_class, TrainerConfig())
    assert issubclass(TrainingError, RuntimeError)
