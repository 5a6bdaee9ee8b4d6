"""Pearson correlation with explicit handling of zero-variance columns.

Covariances use population normalization (divide by n). Sums are
accumulated in one pass (sum, sum of squares, sum of cross products).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from cmfs.dataset import Dataset

__all__ = ["CorrelationMatrix", "pearson", "correlation_matrix", "is_constant"]


def is_constant(x: np.ndarray) -> bool:
    x = np.asarray(x)
    return bool(x.size == 0 or np.all(x == x[0]))


def pearson(x, y) -> float | None:
    """Pearson correlation of two equal-length vectors.

    Returns ``None`` when either vector has zero variance.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError(f"pearson needs two 1-D vectors of equal length, got {x.shape} and {y.shape}")
    n = x.size
    if n < 2:
        raise ValueError("pearson needs at least 2 observations")
    if is_constant(x) or is_constant(y):
        return None
    sx, sy = x.sum(), y.sum()
    sxx, syy, sxy = x @ x, y @ y, x @ y
    cov = sxy / n - (sx / n) * (sy / n)
    var_x = sxx / n - (sx / n) ** 2
    var_y = syy / n - (sy / n) ** 2
    if var_x <= 0.0 or var_y <= 0.0:
        return None
    r = cov / math.sqrt(var_x * var_y)
    return float(min(1.0, max(-1.0, r)))


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Symmetric correlation table; ``values`` is NaN wherever ``defined`` is False."""

    values: np.ndarray
    defined: np.ndarray

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def filled(self, fill: float = 0.0) -> np.ndarray:
        return np.where(self.defined, self.values, fill)


def _correlate_columns(x: np.ndarray, y: np.ndarray | None = None):
    """Cross-correlation of the columns of ``x`` with the columns of ``y``."""
    n = x.shape[0]
    mean_x = x.sum(axis=0) / n
    var_x = np.einsum("ij,ij->j", x, x) / n - mean_x**2
    const_x = np.array([is_constant(c) for c in x.T], dtype=bool)
    if y is None:
        y, mean_y, var_y, const_y = x, mean_x, var_x, const_x
    else:
        mean_y = y.sum(axis=0) / n
        var_y = np.einsum("ij,ij->j", y, y) / n - mean_y**2
        const_y = np.array([is_constant(c) for c in y.T], dtype=bool)
    const_x = const_x | (var_x <= 0.0)
    const_y = const_y | (var_y <= 0.0)
    cov = (x.T @ y) / n - np.outer(mean_x, mean_y)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = cov / np.sqrt(np.outer(np.where(const_x, 1.0, var_x), np.where(const_y, 1.0, var_y)))
    defined = ~(const_x[:, None] | const_y[None, :])
    r = np.clip(r, -1.0, 1.0)
    r[~defined] = np.nan
    return r, defined


def correlation_matrix(data: Dataset, include_label: bool = False):
    """Pairwise Pearson correlations between the feature columns of ``data``.

    With ``include_label`` the return value is ``(matrix, label_corr)``,
    where ``label_corr[i]`` is the correlation of feature ``i`` with the
    integer label codes (NaN if undefined).
    """
    if data.n_samples < 2:
        raise ValueError("correlation needs at least 2 samples")
    x = np.ascontiguousarray(data.features)
    r, defined = _correlate_columns(x)
    # mirror the upper triangle so symmetry is exact
    upper = np.triu(r, 1)
    r = upper + upper.T
    np.fill_diagonal(r, np.where(np.diag(defined), 1.0, np.nan))
    matrix = CorrelationMatrix(values=r, defined=defined)
    if not include_label:
        return matrix
    label_corr, _ = _correlate_columns(x, data.labels.astype(np.float64)[:, None])
    return matrix, label_corr[:, 0]
