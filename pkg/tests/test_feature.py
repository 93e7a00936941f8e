import numpy as np
import pytest

from phsic import (
    DimensionError,
    EstimatorMismatchError,
    InsufficientDataError,
    PairedDataset,
    cosine,
    fit_feature,
    fit_naive,
    laplacian,
    linear,
    rbf,
    score_feature,
    score_feature_batch,
    score_naive,
)
from phsic.feature import apply_feature_map, feature_map_kind, score_feature_arrays


def test_line3_fit(line3):
    m = fit_feature(line3, linear(), linear())
    np.testing.assert_allclose(m.mean_x, [2.0])
    np.testing.assert_allclose(m.mean_y, [2.0])
    np.testing.assert_allclose(m.cov_xy, [[2 / 3]], rtol=1e-15)
    assert m.n_train == 3 and m.dims == (1, 1)


def test_line3_scores(line3):
    m = fit_feature(line3, linear(), linear())
    assert score_feature(m, [3], [3]) == pytest.approx(2 / 3, rel=1e-15)
    assert score_feature(m, [2], [2]) == 0.0
    assert score_feature(m, [1], [3]) == pytest.approx(-2 / 3, rel=1e-15)


def test_line3_batch(line3):
    m = fit_feature(line3, linear(), linear())
    np.testing.assert_allclose(score_feature_batch(m, line3), [2 / 3, 0, 2 / 3], rtol=1e-15, atol=0)


def test_empty_batch(line3):
    m = fit_feature(line3, linear(), linear())
    empty = PairedDataset.from_vectors(np.zeros((0, 1)), np.zeros((0, 1)))
    assert score_feature_batch(m, empty).shape == (0,)


def test_constant_y_gives_zero_cov(rng):
    ds = PairedDataset.from_vectors(rng.normal(size=(20, 3)), np.tile([1.0, -2.0], (20, 1)))
    m = fit_feature(ds, linear(), linear())
    np.testing.assert_array_equal(m.cov_xy, np.zeros((3, 2)))


@pytest.mark.parametrize("spec", [rbf(1.0), laplacian(1.0)])
def test_unsupported_kernel(spec, line3):
    with pytest.raises(EstimatorMismatchError, match="icd"):
        fit_feature(line3, spec, linear())


def test_too_few_pairs():
    with pytest.raises(InsufficientDataError):
        fit_feature(PairedDataset.from_vectors([[1.0]], [[1.0]]), linear(), linear())


def test_dimension_mismatch(line3):
    m = fit_feature(line3, linear(), linear())
    with pytest.raises(DimensionError):
        score_feature(m, [1.0, 2.0], [1.0])


def test_feature_map_kinds():
    assert feature_map_kind(linear()) == "identity"
    assert feature_map_kind(cosine()) == "length-normalized"
    U = apply_feature_map("length-normalized", [[3.0, 4.0], [0.0, 0.0]])
    np.testing.assert_allclose(U, [[0.6, 0.8], [0.0, 0.0]])


@pytest.mark.parametrize("kx,ky", [(linear(), linear()), (cosine(), cosine()), (linear(), cosine())])
def test_agrees_with_naive(kx, ky, rng):
    ds = PairedDataset.from_vectors(rng.normal(size=(40, 4)), rng.normal(size=(40, 3)))
    f, nv = fit_feature(ds, kx, ky), fit_naive(ds, kx, ky)
    for i in range(0, 40, 7):
        x, y = ds.x_vecs[i], ds.y_vecs[(i * 3) % 40]
        assert score_feature(f, x, y) == pytest.approx(score_naive(nv, x, y), rel=1e-10, abs=1e-14)


def test_batch_equals_single_bitwise(rng):
    ds = PairedDataset.from_vectors(rng.normal(size=(50, 5)), rng.normal(size=(50, 5)))
    m = fit_feature(ds, cosine(), cosine())
    batch = score_feature_batch(m, ds)
    singles = [score_feature(m, x, y) for x, y in zip(ds.x_vecs, ds.y_vecs)]
    assert batch.tolist() == singles


def test_large_offset_is_stable(rng):
    # A shifted sample must give the same covariance; catches naive E[xy] - E[x]E[y].
    X, Y = rng.normal(size=(500, 2)), rng.normal(size=(500, 2))
    base = fit_feature(PairedDataset.from_vectors(X, Y), linear(), linear()).cov_xy
    far = fit_feature(PairedDataset.from_vectors(X + 1e8, Y - 1e8), linear(), linear()).cov_xy
    np.testing.assert_allclose(far, base, atol=1e-7)


def test_fit_is_deterministic(rng):
    ds = PairedDataset.from_vectors(rng.normal(size=(30, 3)), rng.normal(size=(30, 3)))
    a, b = fit_feature(ds, cosine(), cosine()), fit_feature(ds, cosine(), cosine())
    assert a.cov_xy.tobytes() == b.cov_xy.tobytes()


def test_scores_array_shape_checks(line3):
    m = fit_feature(line3, linear(), linear())
    with pytest.raises(DimensionError):
        score_feature_arrays(m, np.zeros((2, 1)), np.zeros((3, 1)))
