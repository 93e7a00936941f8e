"""Incomplete Cholesky factorization of kernel Gram matrices and ICD-based PHSIC.

``icd_factorize`` builds ``A`` with ``A @ A.T ~= K`` by greedy pivoting on the
largest residual diagonal, touching only the kernel diagonal and one kernel
column per step: ``O(n d^2)`` time, ``O(n d)`` memory.

A new point is mapped to its factor row by continuing the same elimination
against the pivots (forward substitution with the pivot rows of ``A``).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import PairedDataset, require_fit_data
from .errors import DimensionError, FactorizationError, ParameterError
from .kernels import KernelSpec, kernel_diag, kernel_matrix

logger = logging.getLogger(__name__)

DEFAULT_RANK = 100
TINY_PIVOT = 1e-12
BREAKDOWN = -1e-9
ROW_BLOCK = 8192


@dataclass(frozen=True, eq=False)
class IcdFactor:
    """Low-rank factor of a Gram matrix.

    ``pivot_rows`` is ``A[pivots]`` (lower triangular up to rounding) and
    ``pivot_diag`` the square roots of the residual diagonals used as
    divisors; with ``pivot_points`` they are all that out-of-sample extension
    needs. ``a_matrix`` may be ``None`` for a factor restored from a model file.
    """

    a_matrix: Optional[np.ndarray]
    pivots: np.ndarray
    pivot_points: np.ndarray
    pivot_rows: np.ndarray
    pivot_diag: np.ndarray
    spec: KernelSpec
    residual_trace: float
    trace_history: tuple = ()

    @property
    def rank(self) -> int:
        return len(self.pivots)


def _as_points(points):
    X = np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise DimensionError("need a nonempty sequence of equal-length vectors")
    return X


def icd_factorize(points, spec: KernelSpec, max_rank: int = DEFAULT_RANK,
                  tol: Optional[float] = None) -> IcdFactor:
    """Pivoted incomplete Cholesky decomposition of the Gram matrix of ``points``.

    Stops after ``max_rank`` columns, when the residual trace drops to ``tol``
    (default ``1e-9`` times the initial trace), or when the best remaining
    residual diagonal is below ``1e-12``.
    """
    X = _as_points(points)
    n = X.shape[0]
    if max_rank < 1 or max_rank > n:
        raise ParameterError(f"max_rank must be in [1, {n}], got {max_rank}")
    if tol is not None and tol < 0:
        raise ParameterError("tol must be nonnegative")

    diag = kernel_diag(spec, X).astype(np.float64, copy=True)
    if np.any(diag < 0):
        raise FactorizationError("kernel diagonal is negative", step=0)
    initial_trace = float(diag.sum())
    if tol is None:
        tol = 1e-9 * initial_trace
    breakdown = BREAKDOWN * max(1.0, float(diag.max()))

    A = np.zeros((n, max_rank), order="F")
    scratch = np.empty(n)
    pivots: list[int] = []
    divisors: list[float] = []
    history = [initial_trace]
    residual = initial_trace
    for j in range(max_rank):
        if residual <= tol:
            break
        p = int(np.argmax(diag))
        top = diag[p]
        if top < TINY_PIVOT:
            logger.info("incomplete Cholesky stopped at rank %d (pivot %.3g)", j, top)
            break
        root = math.sqrt(top)
        col = kernel_matrix(spec, X, X[p:p + 1])[:, 0]
        # Sequential elementwise updates instead of one matrix-vector product:
        # the rounding then does not depend on how many rows are processed.
        # Row blocks keep the working set in cache as n grows.
        for s in range(0, n, ROW_BLOCK):
            e = min(s + ROW_BLOCK, n)
            cb, sb = col[s:e], scratch[: e - s]
            for m in range(j):
                np.multiply(A[s:e, m], A[p, m], out=sb)
                cb -= sb
        # Earlier pivots keep their rounding-level entries rather than exact
        # zeros: extension repeats these same operations and then reproduces
        # every training row bit for bit.
        col /= root
        A[:, j] = col
        pivots.append(p)
        divisors.append(root)

        diag -= col * col
        diag[pivots] = 0.0
        low = float(diag.min())
        if low < breakdown:
            raise FactorizationError(
                f"residual diagonal became negative ({low:.3g})", step=j + 1
            )
        np.maximum(diag, 0.0, out=diag)
        residual = float(diag.sum())
        history.append(residual)

    d = len(pivots)
    if d == 0:
        raise FactorizationError("Gram matrix is numerically zero; nothing to factorize", step=0)
    A = np.asfortranarray(A[:, :d])
    piv = np.asarray(pivots, dtype=np.intp)
    rows = np.ascontiguousarray(A[piv])
    for arr in (A, piv, rows):
        arr.setflags(write=False)
    pts = X[piv].copy()
    div = np.asarray(divisors)
    for arr in (pts, div):
        arr.setflags(write=False)
    return IcdFactor(A, piv, pts, rows, div, spec, residual, tuple(history))


def icd_extend_rows(factor: IcdFactor, Q) -> np.ndarray:
    """Factor rows for a batch of points, shape ``(m, d)``.

    Runs the factorization's own elimination against the pivots,
    ``a[j] = (k(x, pivot_j) - sum_{m<j} a[m] * A[pivot_j, m]) / A[pivot_j, j]``,
    with the same operation order, so a training point gets back its stored
    row.
    """
    Q = np.asarray(Q, dtype=np.float64)
    if Q.ndim != 2 or Q.shape[1] != factor.pivot_points.shape[1]:
        raise DimensionError(
            f"expected {factor.pivot_points.shape[1]}-dimensional vectors"
        )
    rows, div = factor.pivot_rows, factor.pivot_diag
    d = rows.shape[0]
    partial = kernel_matrix(factor.spec, Q, factor.pivot_points)
    out = np.empty_like(partial)
    for m in range(d):
        out[:, m] = partial[:, m] / div[m]
        if m + 1 < d:
            partial[:, m + 1:] -= np.outer(out[:, m], rows[m + 1:, m])
    return out


def icd_extend(factor: IcdFactor, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    return icd_extend_rows(factor, x[None, :])[0]


@dataclass(frozen=True, eq=False)
class IcdModel:
    factor_x: IcdFactor
    factor_y: IcdFactor
    mean_a: np.ndarray
    mean_b: np.ndarray
    c_icd: np.ndarray
    n_train: int


def fit_icd(ds: PairedDataset, kernel_x: KernelSpec, kernel_y: KernelSpec,
            max_rank: int = DEFAULT_RANK, tol: Optional[float] = None) -> IcdModel:
    """Factorize both Gram matrices and form ``C = (1/n) (A - 1 abar^T)^T B``.

    ``max_rank`` is capped at ``n``. Centering subtracts column means of ``A``
    instead of multiplying by the centering matrix.
    """
    X, Y = require_fit_data(ds)
    n = X.shape[0]
    rank = min(max_rank, n)
    fx = icd_factorize(X, kernel_x, rank, tol)
    fy = icd_factorize(Y, kernel_y, rank, tol)
    A, B = fx.a_matrix, fy.a_matrix
    mean_a = A.mean(axis=0)
    mean_b = B.mean(axis=0)
    c = (A - mean_a).T @ B / n
    for arr in (mean_a, mean_b, c):
        arr.setflags(write=False)
    return IcdModel(fx, fy, mean_a, mean_b, c, n)


def score_icd_arrays(model: IcdModel, X, Y) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise DimensionError("expected two aligned 2-D batches of vectors")
    a = icd_extend_rows(model.factor_x, X) - model.mean_a
    b = icd_extend_rows(model.factor_y, Y) - model.mean_b
    return np.einsum("ik,ik->i", a @ model.c_icd, b)


def score_icd(model: IcdModel, x_vec, y_vec) -> float:
    x = np.atleast_1d(np.asarray(x_vec, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y_vec, dtype=np.float64))
    return float(score_icd_arrays(model, x[None, :], y[None, :])[0])


def score_icd_batch(model: IcdModel, pairs: PairedDataset) -> np.ndarray:
    if pairs.n == 0:
        return np.zeros(0)
    X, Y = pairs.vectors()
    return score_icd_arrays(model, X, Y)


def score_icd_in_sample(model: IcdModel) -> np.ndarray:
    """Training-pair scores straight from the stored factor rows."""
    A, B = model.factor_x.a_matrix, model.factor_y.a_matrix
    if A is None or B is None:
        raise ParameterError("model does not retain its training factors")
    return np.einsum("ik,ik->i", (A - model.mean_a) @ model.c_icd, B - model.mean_b)


def hsic_icd(model: IcdModel) -> float:
    """``||(HA)^T B||_F^2 / n^2``."""
    return float(np.sum(model.c_icd**2))
