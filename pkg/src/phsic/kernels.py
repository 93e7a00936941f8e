"""Positive-definite kernels on real vectors, Gram matrices and kernel centering.

A :class:`KernelSpec` is a small immutable tree. Leaves are ``linear``,
``cosine``, ``rbf``, ``laplacian`` and ``polynomial``; ``sum`` and ``product``
nodes combine two children, which keeps the result positive definite.

Textual form (used on the command line and inside model files)::

    linear | cos | rbf:SIGMA | laplacian:GAMMA | poly:DEGREE:OFFSET
    sum(SPEC,SPEC) | prod(SPEC,SPEC)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial.distance import cdist

from ._numerics import CompensatedSum, iter_blocks
from .errors import DimensionError, ParameterError

LEAF_FAMILIES = ("linear", "cosine", "rbf", "laplacian", "polynomial")
COMPOSITE_FAMILIES = ("sum", "product")


@dataclass(frozen=True)
class KernelSpec:
    family: str
    params: tuple = ()
    children: tuple = ()

    def __post_init__(self):
        fam = self.family
        if fam in COMPOSITE_FAMILIES:
            if len(self.children) != 2 or not all(isinstance(c, KernelSpec) for c in self.children):
                raise ParameterError(f"{fam} kernel needs exactly two child kernels")
            return
        if fam not in LEAF_FAMILIES:
            raise ParameterError(f"unknown kernel family {fam!r}")
        if self.children:
            raise ParameterError(f"{fam} kernel takes no children")
        params = tuple(float(p) for p in self.params)
        if fam in ("linear", "cosine") and params:
            raise ParameterError(f"{fam} kernel takes no parameters")
        if fam in ("rbf", "laplacian"):
            if len(params) != 1 or not params[0] > 0 or not math.isfinite(params[0]):
                name = "sigma" if fam == "rbf" else "gamma"
                raise ParameterError(f"{fam} kernel needs a finite {name} > 0")
        if fam == "polynomial":
            if len(params) != 2:
                raise ParameterError("polynomial kernel needs (degree, offset)")
            degree, offset = params
            if degree < 1 or degree != int(degree):
                raise ParameterError("polynomial degree must be a positive integer")
            if not offset >= 0:
                raise ParameterError("polynomial offset must be >= 0")
        object.__setattr__(self, "params", params)

    def __str__(self):
        return format_kernel(self)


def linear() -> KernelSpec:
    return KernelSpec("linear")


def cosine() -> KernelSpec:
    return KernelSpec("cosine")


def rbf(sigma: float = 1.0) -> KernelSpec:
    return KernelSpec("rbf", (sigma,))


def laplacian(gamma: float = 1.0) -> KernelSpec:
    return KernelSpec("laplacian", (gamma,))


def polynomial(degree: int = 2, offset: float = 1.0) -> KernelSpec:
    return KernelSpec("polynomial", (degree, offset))


def sum_of(a: KernelSpec, b: KernelSpec) -> KernelSpec:
    return KernelSpec("sum", children=(a, b))


def product_of(a: KernelSpec, b: KernelSpec) -> KernelSpec:
    return KernelSpec("product", children=(a, b))


def format_kernel(spec: KernelSpec) -> str:
    fam = spec.family
    if fam == "linear":
        return "linear"
    if fam == "cosine":
        return "cos"
    if fam == "rbf":
        return f"rbf:{spec.params[0]!r}"
    if fam == "laplacian":
        return f"laplacian:{spec.params[0]!r}"
    if fam == "polynomial":
        return f"poly:{int(spec.params[0])}:{spec.params[1]!r}"
    tag = "sum" if fam == "sum" else "prod"
    a, b = spec.children
    return f"{tag}({format_kernel(a)},{format_kernel(b)})"


def _split_top(body):
    depth = 0
    for i, ch in enumerate(body):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            return body[:i], body[i + 1:]
    raise ParameterError(f"composite kernel needs two comma-separated children: {body!r}")


def parse_kernel(text: str) -> KernelSpec:
    text = text.strip()
    for tag, fam in (("sum(", "sum"), ("prod(", "product")):
        if text.startswith(tag):
            if not text.endswith(")"):
                raise ParameterError(f"unbalanced parentheses in kernel {text!r}")
            a, b = _split_top(text[len(tag):-1])
            return KernelSpec(fam, children=(parse_kernel(a), parse_kernel(b)))
    name, *args = text.split(":")
    try:
        values = [float(a) for a in args]
    except ValueError:
        raise ParameterError(f"bad kernel parameter in {text!r}") from None
    if name == "linear" and not values:
        return linear()
    if name in ("cos", "cosine") and not values:
        return cosine()
    if name == "rbf" and len(values) <= 1:
        return rbf(*values)
    if name == "laplacian" and len(values) <= 1:
        return laplacian(*values)
    if name in ("poly", "polynomial") and len(values) == 2:
        return polynomial(values[0], values[1])
    raise ParameterError(
        f"cannot parse kernel {text!r}; expected cos|linear|rbf:SIGMA|laplacian:GAMMA|poly:DEGREE:OFFSET"
    )


def _unit_rows(X):
    norms = np.sqrt(np.einsum("ij,ij->i", X, X))
    out = np.zeros_like(X)
    nz = norms > 0
    out[nz] = X[nz] / norms[nz, None]
    return out


def _check_dims(X, Y):
    if X.shape[1] != Y.shape[1]:
        raise DimensionError(f"vector length mismatch: {X.shape[1]} vs {Y.shape[1]}")


def kernel_matrix(spec: KernelSpec, X, Y) -> np.ndarray:
    """Cross-kernel block ``K[i, j] = k(X[i], Y[j])`` for row-vector matrices."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    _check_dims(X, Y)
    fam = spec.family
    if fam == "linear":
        return X @ Y.T
    if fam == "cosine":
        return _unit_rows(X) @ _unit_rows(Y).T
    if fam == "rbf":
        sigma = spec.params[0]
        return np.exp(-cdist(X, Y, "sqeuclidean") / (2.0 * sigma * sigma))
    if fam == "laplacian":
        return np.exp(-spec.params[0] * cdist(X, Y, "cityblock"))
    if fam == "polynomial":
        degree, offset = spec.params
        return (X @ Y.T + offset) ** int(degree)
    a, b = spec.children
    if fam == "sum":
        return kernel_matrix(a, X, Y) + kernel_matrix(b, X, Y)
    return kernel_matrix(a, X, Y) * kernel_matrix(b, X, Y)


def kernel_diag(spec: KernelSpec, X) -> np.ndarray:
    """``k(x_i, x_i)`` for every row without forming the Gram matrix."""
    X = np.asarray(X, dtype=np.float64)
    fam = spec.family
    sq = np.einsum("ij,ij->i", X, X)
    if fam == "linear":
        return sq
    if fam == "cosine":
        return (sq > 0).astype(np.float64)
    if fam in ("rbf", "laplacian"):
        return np.ones(X.shape[0])
    if fam == "polynomial":
        degree, offset = spec.params
        return (sq + offset) ** int(degree)
    a, b = spec.children
    if fam == "sum":
        return kernel_diag(a, X) + kernel_diag(b, X)
    return kernel_diag(a, X) * kernel_diag(b, X)


def kernel_eval(spec: KernelSpec, u, v) -> float:
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    if u.shape != v.shape or u.ndim != 1:
        raise DimensionError(f"vector length mismatch: {u.shape} vs {v.shape}")
    return float(kernel_matrix(spec, u[None, :], v[None, :])[0, 0])


@dataclass(frozen=True, eq=False)
class GramMatrix:
    values: np.ndarray
    spec: KernelSpec


def _points(points):
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise DimensionError("need a nonempty sequence of equal-length vectors")
    return arr


def gram(spec: KernelSpec, points) -> GramMatrix:
    X = _points(points)
    K = kernel_matrix(spec, X, X)
    upper = np.triu(K)
    K = upper + np.triu(K, 1).T
    K.setflags(write=False)
    return GramMatrix(K, spec)


class GramMeans(NamedTuple):
    col_means: np.ndarray
    grand_mean: float


def gram_means(spec: KernelSpec, points) -> GramMeans:
    """Column means and grand mean of the Gram matrix, streamed over row blocks.

    O(n^2) kernel evaluations, O(n) memory.
    """
    X = _points(points)
    n = X.shape[0]
    acc = CompensatedSum(n)
    for lo, hi in iter_blocks(n, block=max(1, min(n, 2**22 // max(n, 1)))):
        acc.add(kernel_matrix(spec, X[lo:hi], X).sum(axis=0))
    col = acc.value() / n
    grand = math.fsum(col) / n
    col.setflags(write=False)
    return GramMeans(col, grand)


def centered_kernel_rows(spec: KernelSpec, Q, points, means: GramMeans) -> np.ndarray:
    """Data-centered kernel values for several query rows at once, shape ``(m, n)``."""
    K = kernel_matrix(spec, np.asarray(Q, dtype=np.float64), _points(points))
    return K - K.mean(axis=1, keepdims=True) - means.col_means[None, :] + means.grand_mean


def centered_kernel_vector(spec: KernelSpec, x, points, means: GramMeans) -> np.ndarray:
    """Centered kernel between ``x`` and each training point.

    Entry ``i`` is ``k(x, x_i) - mean_j k(x, x_j) - mean_j k(x_j, x_i) + mean_jj' k(x_j, x_j')``;
    the entries sum to zero.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    return centered_kernel_rows(spec, x[None, :], points, means)[0]
