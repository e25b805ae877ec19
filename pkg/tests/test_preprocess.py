import numpy as np
import pytest

from framepool.core import FrameFeatureSequence, FramePoolError
from framepool.preprocess import (
    ConfigError,
    ResampleGrid,
    interpolant_eval,
    preprocess_corpus,
    preprocess_video,
    resample,
    resolve_mode,
    sort_components_descending,
)


def _seq(frames, vid="v"):
    return FrameFeatureSequence(vid, np.array(frames, dtype=float))


def _product_formula(nodes, u):
    # independent oracle: textbook Lagrange basis products
    n = len(nodes)
    total = 0.0
    for k in range(n):
        basis = 1.0
        for j in range(n):
            if j != k:
                basis *= (u - (j + 1)) / ((k + 1) - (j + 1))
        total += nodes[k] * basis
    return total


def test_sort_single_component():
    assert sort_components_descending(_seq([[1], [3], [2]]))[:, 0].tolist() == [3, 2, 1]


def test_sort_components_independently():
    out = sort_components_descending(_seq([[1, 5], [3, 4]]))
    assert out.tolist() == [[3, 5], [1, 4]]


def test_sort_constant_component():
    assert sort_components_descending(_seq([[7], [7], [7]]))[:, 0].tolist() == [7, 7, 7]


def test_interpolant_node_and_midpoint():
    assert interpolant_eval([4, 2, 1], 2.0) == 2.0
    assert interpolant_eval([4, 2, 1], 1.5) == pytest.approx(2.875, abs=1e-12)
    assert _product_formula([4, 2, 1], 1.5) == pytest.approx(2.875, abs=1e-12)


def test_interpolant_constant():
    for u in (1.0, 1.3, 2.5, 4.0):
        assert interpolant_eval([3.5] * 4, u) == pytest.approx(3.5, abs=1e-12)


def test_interpolant_matches_product_formula():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(2, 12))
        nodes = rng.normal(size=n)
        u = float(rng.uniform(1, n))
        assert interpolant_eval(nodes, u) == pytest.approx(_product_formula(nodes, u), rel=1e-9, abs=1e-9)


def test_interpolant_rejects_extrapolation():
    with pytest.raises(ValueError):
        interpolant_eval([1, 2, 3], 0.5)
    with pytest.raises(ValueError):
        interpolant_eval([1, 2, 3], 3.0001)


def test_grid_points():
    assert ResampleGrid(5, 3).points.tolist() == [1.0, 3.0, 5.0]
    assert ResampleGrid(1, 4).points.tolist() == [1.0] * 4


@pytest.mark.parametrize("mode", ["lagrange", "linear", "auto"])
def test_resample_identity(mode):
    assert resample(np.array([[5.0], [3.0], [0.0]]), 3, mode=mode).X.tolist() == [[5, 3, 0]]


@pytest.mark.parametrize("mode", ["lagrange", "linear"])
def test_resample_integer_landing_grid(mode):
    col = np.array([[9.0], [7.0], [4.0], [2.0], [1.0]])
    assert resample(col, 3, mode=mode).X.tolist() == [[9, 4, 1]]


def test_resample_endpoints():
    assert resample(np.array([[4.0], [2.0], [1.0]]), 2, mode="lagrange").X.tolist() == [[4, 1]]


def test_resample_rejects_short_target():
    with pytest.raises(ConfigError):
        resample(np.ones((3, 1)), 1)


def test_single_frame_is_repeated():
    X = preprocess_video(_seq([[1.0, 2.0]]), T=4)
    assert X.X.tolist() == [[1.0] * 4, [2.0] * 4]


def test_lagrange_rows_stay_monotone_and_in_range():
    rng = np.random.default_rng(1)
    for _ in range(30):
        seq = _seq(rng.normal(size=(int(rng.integers(2, 60)), 3)))
        X = preprocess_video(seq, T=20, mode="lagrange").X
        assert np.all(np.diff(X, axis=1) <= 0)
        assert np.all(X <= seq.frames.max(axis=0)[:, None])
        assert np.all(X >= seq.frames.min(axis=0)[:, None])


def test_auto_mode_cutover():
    assert resolve_mode("auto", 60) == "lagrange"
    assert resolve_mode("auto", 61) == "linear"
    with pytest.raises(ConfigError):
        resolve_mode("cubic", 10)


def test_corpus_shapes_and_errors():
    assert preprocess_corpus([], T=20) == []
    rng = np.random.default_rng(2)
    only = _seq(rng.normal(size=(20, 3)))
    (mat,) = preprocess_corpus([only], T=20)
    assert np.array_equal(mat.X, sort_components_descending(only).T)
    mixed = [_seq(rng.normal(size=(10, 3)), "a"), _seq(rng.normal(size=(500, 3)), "b")]
    assert all(m.shape == (3, 20) for m in preprocess_corpus(mixed, T=20))
    with pytest.raises(FramePoolError, match="'b'"):
        preprocess_corpus([_seq(np.ones((4, 3)), "a"), _seq(np.ones((4, 2)), "b"), _seq(np.ones((4, 3)), "c")], T=5)
