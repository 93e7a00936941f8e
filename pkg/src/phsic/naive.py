"""Data-space PHSIC computed directly from centered kernel values.

This is the reference estimator: O(n^2) kernel evaluations to fit and O(n)
per scored pair. The faster estimators are checked against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numerics import iter_blocks
from .dataset import PairedDataset, require_fit_data
from .errors import DimensionError
from .kernels import GramMeans, KernelSpec, centered_kernel_rows, gram_means, kernel_matrix

# Query rows per block when scoring; bounds the (rows, n) kernel blocks.
_QUERY_BLOCK_ELEMENTS = 2**22


@dataclass(frozen=True, eq=False)
class NaiveModel:
    x_train: np.ndarray
    y_train: np.ndarray
    spec_x: KernelSpec
    spec_y: KernelSpec
    means_x: GramMeans
    means_y: GramMeans

    @property
    def n_train(self) -> int:
        return self.x_train.shape[0]

    @property
    def gram_col_means_x(self):
        return self.means_x.col_means

    @property
    def gram_col_means_y(self):
        return self.means_y.col_means

    @property
    def grand_mean_x(self):
        return self.means_x.grand_mean

    @property
    def grand_mean_y(self):
        return self.means_y.grand_mean


def fit_naive(ds: PairedDataset, kernel_x: KernelSpec, kernel_y: KernelSpec) -> NaiveModel:
    X, Y = require_fit_data(ds)
    return NaiveModel(
        X, Y, kernel_x, kernel_y, gram_means(kernel_x, X), gram_means(kernel_y, Y)
    )


def score_naive_arrays(model: NaiveModel, X, Y) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise DimensionError("expected two aligned 2-D batches of vectors")
    if X.shape[1] != model.x_train.shape[1] or Y.shape[1] != model.y_train.shape[1]:
        raise DimensionError(
            f"model expects ({model.x_train.shape[1]}, {model.y_train.shape[1]})-dimensional pairs"
        )
    n = model.n_train
    out = np.empty(X.shape[0])
    block = max(1, _QUERY_BLOCK_ELEMENTS // n)
    for lo, hi in iter_blocks(X.shape[0], block):
        cx = centered_kernel_rows(model.spec_x, X[lo:hi], model.x_train, model.means_x)
        cy = centered_kernel_rows(model.spec_y, Y[lo:hi], model.y_train, model.means_y)
        out[lo:hi] = np.einsum("ij,ij->i", cx, cy) / n
    return out


def score_naive(model: NaiveModel, x_vec, y_vec) -> float:
    """Mean over training pairs of the product of centered x- and y-similarities."""
    x = np.atleast_1d(np.asarray(x_vec, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y_vec, dtype=np.float64))
    return float(score_naive_arrays(model, x[None, :], y[None, :])[0])


def score_naive_vector_form(model: NaiveModel, x_vec, y_vec) -> float:
    """Same score written as ``(k - kbar)^T (H / n) (l - lbar)``.

    ``k`` holds the raw kernel values against the training points and ``kbar``
    the Gram column means; only one side needs explicit centering by ``H``.
    """
    x = np.atleast_1d(np.asarray(x_vec, dtype=np.float64))[None, :]
    y = np.atleast_1d(np.asarray(y_vec, dtype=np.float64))[None, :]
    k = kernel_matrix(model.spec_x, x, model.x_train)[0] - model.gram_col_means_x
    l = kernel_matrix(model.spec_y, y, model.y_train)[0] - model.gram_col_means_y
    n = model.n_train
    return float(k @ (l - l.mean()) / n)


def score_naive_batch(model: NaiveModel, pairs: PairedDataset) -> np.ndarray:
    if pairs.n == 0:
        return np.zeros(0)
    X, Y = pairs.vectors()
    return score_naive_arrays(model, X, Y)


def hsic_empirical(model: NaiveModel, ds: PairedDataset) -> float:
    """Mean in-sample PHSIC, i.e. the biased empirical HSIC ``tr(HKHL) / n^2``."""
    scores = score_naive_batch(model, ds)
    return math.fsum(scores) / len(scores)


def hsic_trace(K, L) -> float:
    """``tr(HKHL) / n^2`` from explicit Gram matrices (small n only)."""
    K = np.asarray(K, dtype=np.float64)
    L = np.asarray(L, dtype=np.float64)
    n = K.shape[0]
    H = np.eye(n) - np.full((n, n), 1.0 / n)
    return float(np.trace(H @ K @ H @ L) / n**2)
