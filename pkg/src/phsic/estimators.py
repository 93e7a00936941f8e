"""Estimator-agnostic fit / score entry points."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .dataset import PairedDataset
from .errors import ParameterError
from .feature import FeatureModel, fit_feature, score_feature_arrays
from .icd import DEFAULT_RANK, IcdModel, fit_icd, score_icd_arrays, score_icd_in_sample
from .kernels import KernelSpec
from .naive import NaiveModel, fit_naive, score_naive_arrays

ESTIMATORS = ("feature", "icd", "naive")


def fit_model(ds: PairedDataset, kernel_x: KernelSpec, kernel_y: KernelSpec,
              estimator: str = "feature", rank: int = DEFAULT_RANK,
              tol: Optional[float] = None):
    if estimator == "feature":
        return fit_feature(ds, kernel_x, kernel_y)
    if estimator == "icd":
        return fit_icd(ds, kernel_x, kernel_y, rank, tol)
    if estimator == "naive":
        return fit_naive(ds, kernel_x, kernel_y)
    raise ParameterError(f"unknown estimator {estimator!r}; choose from {', '.join(ESTIMATORS)}")


def score_arrays(model, X, Y) -> np.ndarray:
    """PHSIC of each row pair ``(X[i], Y[i])`` under a fitted model of any kind."""
    if isinstance(model, FeatureModel):
        return score_feature_arrays(model, X, Y)
    if isinstance(model, IcdModel):
        return score_icd_arrays(model, X, Y)
    if isinstance(model, NaiveModel):
        return score_naive_arrays(model, X, Y)
    raise TypeError(f"not a PHSIC model: {type(model).__name__}")


def score_pairs(model, ds: PairedDataset) -> np.ndarray:
    if ds.n == 0:
        return np.zeros(0)
    X, Y = ds.vectors()
    return score_arrays(model, X, Y)


def in_sample_scores(model, ds: PairedDataset) -> np.ndarray:
    """Scores of the training pairs; ICD models with retained factors reuse their rows."""
    if isinstance(model, IcdModel) and model.factor_x.a_matrix is not None:
        return score_icd_in_sample(model)
    return score_pairs(model, ds)
