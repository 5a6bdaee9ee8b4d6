"""Feature scorers: Confidence Machine plus Pearson, Laplacian Score and PCA baselines.

Every scorer takes a :class:`~cmfs.dataset.Dataset` and returns a
:class:`FeatureRanking` whose ``order`` lists feature indices best first.
Ties are broken by ascending feature index, and zero-variance features
always sort after every informative one.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from cmfs.dataset import Dataset
from cmfs.errors import DataError
from cmfs.linalg import eigen_symmetric, pairwise_sq_distances
from cmfs.stats import CorrelationMatrix, correlation_matrix, is_constant

__all__ = [
    "EPSILON",
    "Method",
    "FeatureScoreRecord",
    "FeatureRanking",
    "relevance_scores",
    "redundancy_scores",
    "nonconformity_scores",
    "conformal_p_values",
    "rank_confidence_machine",
    "rank_pearson",
    "rank_laplacian",
    "rank_pca",
    "rank",
    "select_top",
    "laplacian_graph",
]

EPSILON = 1e-12
DEFAULT_LAPLACIAN_K = 5


class Method(str, enum.Enum):
    CONFIDENCE_MACHINE = "cm"
    PEARSON = "pearson"
    LAPLACIAN = "laplacian"
    PCA = "pca"

    @classmethod
    def parse(cls, name: str | Method) -> Method:
        if isinstance(name, Method):
            return name
        key = name.strip().lower().replace("-", "_")
        aliases = {
            "cm": cls.CONFIDENCE_MACHINE,
            "confidence_machine": cls.CONFIDENCE_MACHINE,
            "confidencemachine": cls.CONFIDENCE_MACHINE,
            "liu_corr": cls.CONFIDENCE_MACHINE,
            "pearson": cls.PEARSON,
            "per": cls.PEARSON,
            "laplacian": cls.LAPLACIAN,
            "laplacianscore": cls.LAPLACIAN,
            "laplacian_score": cls.LAPLACIAN,
            "lap": cls.LAPLACIAN,
            "pca": cls.PCA,
        }
        if key not in aliases:
            raise ValueError(f"unknown method {name!r}; choose from {', '.join(m.value for m in cls)}")
        return aliases[key]

    @property
    def higher_is_better(self) -> bool:
        return self is not Method.LAPLACIAN


@dataclass(frozen=True)
class FeatureScoreRecord:
    feature_index: int
    feature_name: str
    relevance: float | None = None
    redundancy: float | None = None
    nonconformity: float | None = None
    p_value: float | None = None
    baseline_score: float | None = None
    degenerate: bool = False

    @property
    def score(self) -> float | None:
        return self.nonconformity if self.baseline_score is None else self.baseline_score


@dataclass(frozen=True)
class FeatureRanking:
    method: Method
    records: tuple[FeatureScoreRecord, ...]
    order: tuple[int, ...]

    @property
    def n_features(self) -> int:
        return len(self.records)

    def ranked_records(self) -> list[FeatureScoreRecord]:
        return [self.records[i] for i in self.order]


def _order(scores: np.ndarray, degenerate: np.ndarray, higher_is_better: bool = True) -> tuple[int, ...]:
    key = -scores if higher_is_better else scores
    return tuple(sorted(range(len(scores)), key=lambda i: (bool(degenerate[i]), float(key[i]), i)))


def relevance_scores(corr_with_label) -> np.ndarray:
    """Absolute correlation with the label; undefined (NaN) entries become 0."""
    r = np.asarray(corr_with_label, dtype=np.float64)
    return np.where(np.isnan(r), 0.0, np.abs(r))


def redundancy_scores(corr: CorrelationMatrix | np.ndarray) -> np.ndarray:
    """Sum of absolute correlations with every *other* feature.

    Undefined entries count as 0 and the diagonal is excluded.
    """
    values = corr.values if isinstance(corr, CorrelationMatrix) else np.asarray(corr, dtype=np.float64)
    a = np.abs(np.where(np.isnan(values), 0.0, values))
    np.fill_diagonal(a, 0.0)
    return a.sum(axis=1)


def nonconformity_scores(pl, ps, degenerate=None) -> np.ndarray:
    """Relevance over redundancy, with redundancy clamped below at ``EPSILON``."""
    pl = np.asarray(pl, dtype=np.float64)
    ps = np.asarray(ps, dtype=np.float64)
    if pl.shape != ps.shape:
        raise ValueError("relevance and redundancy vectors differ in length")
    if np.any(ps < 0):
        raise ValueError("redundancy scores must be non-negative")
    alpha = pl / np.maximum(ps, EPSILON)
    if degenerate is not None:
        alpha = np.where(np.asarray(degenerate, dtype=bool), 0.0, alpha)
    return alpha


def conformal_p_values(alpha) -> np.ndarray:
    """Fraction of scores strictly greater than each score.

    ``p[k] = #{i : alpha[i] > alpha[k]} / n``; tied scores share a p-value
    and the maxima get 0.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    n = alpha.size
    if n < 1:
        raise ValueError("need at least one score")
    greater = n - np.searchsorted(np.sort(alpha), alpha, side="right")
    return greater / n


def rank_confidence_machine(data: Dataset) -> FeatureRanking:
    """Rank features by nonconformity, best (largest, p-value smallest) first."""
    corr, label_corr = correlation_matrix(data, include_label=True)
    degenerate = np.isnan(label_corr)
    pl = relevance_scores(label_corr)
    ps = redundancy_scores(corr)
    alpha = nonconformity_scores(pl, ps, degenerate)
    p = conformal_p_values(alpha)
    records = tuple(
        FeatureScoreRecord(
            feature_index=i,
            feature_name=data.feature_names[i],
            relevance=float(pl[i]),
            redundancy=float(ps[i]),
            nonconformity=float(alpha[i]),
            p_value=float(p[i]),
            degenerate=bool(degenerate[i]),
        )
        for i in range(data.n_features)
    )
    return FeatureRanking(Method.CONFIDENCE_MACHINE, records, _order(alpha, degenerate))


def _baseline(data: Dataset, method: Method, scores: np.ndarray, degenerate: np.ndarray) -> FeatureRanking:
    records = tuple(
        FeatureScoreRecord(
            feature_index=i,
            feature_name=data.feature_names[i],
            baseline_score=float(scores[i]),
            degenerate=bool(degenerate[i]),
        )
        for i in range(data.n_features)
    )
    return FeatureRanking(method, records, _order(scores, degenerate, method.higher_is_better))


def rank_pearson(data: Dataset) -> FeatureRanking:
    """Rank by absolute correlation with the label codes, descending."""
    _, label_corr = correlation_matrix(data, include_label=True)
    degenerate = np.isnan(label_corr)
    return _baseline(data, Method.PEARSON, relevance_scores(label_corr), degenerate)


def laplacian_graph(x: np.ndarray, k_neighbors: int = DEFAULT_LAPLACIAN_K, bandwidth: float | None = None):
    """Heat-kernel kNN graph used by the Laplacian Score.

    Rows ``i`` and ``j`` are joined when either is among the other's
    ``k_neighbors`` nearest rows (distance ties go to the lower index).
    Edge weight is ``exp(-||x_i - x_j||^2 / t)``. With ``bandwidth=None``,
    ``t`` is the mean of the nonzero squared neighbor distances.

    Returns ``(W, degree, t)``.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= k_neighbors < n:
        raise DataError(f"k_neighbors must satisfy 1 <= k < n_samples ({n}), got {k_neighbors}")
    d2 = pairwise_sq_distances(x)
    adjacency = np.zeros((n, n), dtype=bool)
    knn_d2 = []
    for i in range(n):
        ranked = np.argsort(d2[i], kind="stable")
        ranked = ranked[ranked != i][:k_neighbors]
        adjacency[i, ranked] = True
        knn_d2.append(d2[i, ranked])
    adjacency |= adjacency.T
    if bandwidth is None:
        knn_d2 = np.concatenate(knn_d2)
        positive = knn_d2[knn_d2 > 0]
        t = float(positive.mean()) if positive.size else 1.0
    else:
        t = float(bandwidth)
        if not t > 0:
            raise ValueError("bandwidth must be positive")
    w = np.where(adjacency, np.exp(-d2 / t), 0.0)
    return w, w.sum(axis=1), t


def rank_laplacian(
    data: Dataset, k_neighbors: int = DEFAULT_LAPLACIAN_K, bandwidth: float | str | None = None
) -> FeatureRanking:
    """Laplacian Score per feature; smaller scores rank first."""
    if isinstance(bandwidth, str):
        if bandwidth != "auto":
            raise ValueError(f"bandwidth must be a positive number or 'auto', got {bandwidth!r}")
        bandwidth = None
    x = data.features
    w, degree, _ = laplacian_graph(x, k_neighbors, bandwidth)
    lap = np.diag(degree) - w
    total = degree.sum()
    scores = np.zeros(data.n_features)
    degenerate = np.zeros(data.n_features, dtype=bool)
    for r in range(data.n_features):
        f = x[:, r]
        if is_constant(f):
            degenerate[r] = True
            continue
        f_tilde = f - (f @ degree) / total
        den = f_tilde @ (degree * f_tilde)
        if not den > 0:
            degenerate[r] = True
            continue
        scores[r] = (f_tilde @ lap @ f_tilde) / den
    return _baseline(data, Method.LAPLACIAN, scores, degenerate)


def rank_pca(data: Dataset) -> FeatureRanking:
    """Rank by absolute loading on the leading eigenvector of the correlation matrix."""
    corr = correlation_matrix(data)
    c = corr.filled(0.0)
    np.fill_diagonal(c, 1.0)
    eig = eigen_symmetric(c)
    scores = np.abs(eig.eigenvectors[:, 0])
    degenerate = ~np.diag(corr.defined)
    return _baseline(data, Method.PCA, scores, degenerate)


def rank(data: Dataset, method: Method | str, *, k_neighbors: int = DEFAULT_LAPLACIAN_K, bandwidth=None) -> FeatureRanking:
    method = Method.parse(method)
    if method is Method.CONFIDENCE_MACHINE:
        return rank_confidence_machine(data)
    if method is Method.PEARSON:
        return rank_pearson(data)
    if method is Method.LAPLACIAN:
        return rank_laplacian(data, k_neighbors=k_neighbors, bandwidth=bandwidth)
    return rank_pca(data)


def select_top(ranking: FeatureRanking, m: int) -> list[int]:
    if not 1 <= m <= ranking.n_features:
        raise ValueError(f"m must lie in [1, {ranking.n_features}], got {m}")
    return list(ranking.order[:m])
