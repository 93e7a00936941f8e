"""Feature-space PHSIC for kernels with an explicit finite feature map.

For the linear kernel the feature map is the identity; for cosine similarity
it is length normalization. The fitted model is two mean vectors and the
empirical cross-covariance of the mapped features, so fitting is one pass
over the data and scoring a pair costs ``O(d_x * d_y)`` regardless of ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numerics import CompensatedSum, iter_blocks
from .dataset import PairedDataset, require_fit_data
from .errors import DimensionError, EstimatorMismatchError
from .kernels import KernelSpec

IDENTITY = "identity"
NORMALIZED = "length-normalized"


def feature_map_kind(spec: KernelSpec) -> str:
    if spec.family == "linear":
        return IDENTITY
    if spec.family == "cosine":
        return NORMALIZED
    raise EstimatorMismatchError(
        f"kernel {spec} has no explicit feature map; use the icd (or naive) estimator"
    )


def apply_feature_map(kind: str, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if kind == IDENTITY:
        return X
    norms = np.sqrt(np.einsum("ij,ij->i", X, X))
    out = np.zeros_like(X)
    nz = norms > 0
    out[nz] = X[nz] / norms[nz, None]
    return out


@dataclass(frozen=True, eq=False)
class FeatureModel:
    mean_x: np.ndarray
    mean_y: np.ndarray
    cov_xy: np.ndarray
    map_kind_x: str
    map_kind_y: str
    n_train: int

    @property
    def dims(self):
        return self.cov_xy.shape


def fit_feature(ds: PairedDataset, kernel_x: KernelSpec, kernel_y: KernelSpec) -> FeatureModel:
    """Accumulate feature means and cross-covariance in a single streamed pass.

    Each block is shifted by the first sample's features before the outer
    products are summed (``cov(a - s, b - t) == cov(a, b)``), and block partials
    are merged with compensated summation, so large feature means do not cancel
    catastrophically. Extra memory is one block plus ``O(d_x * d_y)``.
    """
    kind_x = feature_map_kind(kernel_x)
    kind_y = feature_map_kind(kernel_y)
    X, Y = require_fit_data(ds)
    n, dx = X.shape
    dy = Y.shape[1]

    shift_x = apply_feature_map(kind_x, X[:1])[0]
    shift_y = apply_feature_map(kind_y, Y[:1])[0]
    sum_x = CompensatedSum(dx)
    sum_y = CompensatedSum(dy)
    sum_xy = CompensatedSum((dx, dy))
    for lo, hi in iter_blocks(n):
        fx = apply_feature_map(kind_x, X[lo:hi]) - shift_x
        fy = apply_feature_map(kind_y, Y[lo:hi]) - shift_y
        sum_x.add(fx.sum(axis=0))
        sum_y.add(fy.sum(axis=0))
        sum_xy.add(fx.T @ fy)

    dev_x = sum_x.value() / n
    dev_y = sum_y.value() / n
    cov = sum_xy.value() / n - np.outer(dev_x, dev_y)
    mean_x = shift_x + dev_x
    mean_y = shift_y + dev_y
    for arr in (mean_x, mean_y, cov):
        arr.setflags(write=False)
    return FeatureModel(mean_x, mean_y, cov, kind_x, kind_y, n)


def _bilinear_rows(U, C, V):
    # einsum keeps each row's reduction order independent of the batch size,
    # so a batch is bit-identical to scoring its pairs one at a time.
    return np.einsum("ik,ik->i", np.einsum("ij,jk->ik", U, C), V)


def score_feature_arrays(model: FeatureModel, X, Y) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    dx, dy = model.dims
    if X.ndim != 2 or Y.ndim != 2 or X.shape[1] != dx or Y.shape[1] != dy:
        raise DimensionError(
            f"model expects ({dx}, {dy})-dimensional pairs, got {X.shape[1:]} / {Y.shape[1:]}"
        )
    if X.shape[0] != Y.shape[0]:
        raise DimensionError("x and y batches differ in length")
    U = apply_feature_map(model.map_kind_x, X) - model.mean_x
    V = apply_feature_map(model.map_kind_y, Y) - model.mean_y
    return _bilinear_rows(U, model.cov_xy, V)


def score_feature(model: FeatureModel, x_vec, y_vec) -> float:
    x = np.atleast_1d(np.asarray(x_vec, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y_vec, dtype=np.float64))
    if x.ndim != 1 or y.ndim != 1:
        raise DimensionError("score_feature takes one x vector and one y vector")
    return float(score_feature_arrays(model, x[None, :], y[None, :])[0])


def score_feature_batch(model: FeatureModel, pairs: PairedDataset) -> np.ndarray:
    if pairs.n == 0:
        return np.zeros(0)
    X, Y = pairs.vectors()
    return score_feature_arrays(model, X, Y)
