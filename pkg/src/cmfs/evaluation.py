"""Repeated-split kNN evaluation of feature rankings.

Each repetition draws a stratified split, standardizes with training
statistics, ranks features on the training half only, and classifies the
test half with the top-``m`` features for every ``m`` in the sweep.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from cmfs.dataset import Dataset, SplitPair, standardize, stratified_split
from cmfs.errors import DataError
from cmfs.scoring import DEFAULT_LAPLACIAN_K, FeatureRanking, Method, rank

__all__ = [
    "ExperimentConfig",
    "RepetitionResult",
    "EvaluationReport",
    "knn_predict",
    "accuracy",
    "feature_count_limit",
    "evaluate_split",
    "run_sweep",
    "mean_accuracy_low_dim",
]

ALL_METHODS = tuple(Method)


@dataclass(frozen=True)
class ExperimentConfig:
    repetitions: int = 5
    train_fraction: float = 0.5
    base_seed: int = 0
    k_neighbors: int = 5
    sweep_max_fraction: float = 0.8
    lowdim_fraction: float = 0.4
    methods: tuple[Method, ...] = ALL_METHODS
    laplacian_k: int = DEFAULT_LAPLACIAN_K
    classifier: str = "knn"

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(Method.parse(m) for m in self.methods))
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie in (0, 1)")
        if not 0 < self.lowdim_fraction <= self.sweep_max_fraction <= 1:
            raise ValueError("need 0 < lowdim_fraction <= sweep_max_fraction <= 1")
        if self.k_neighbors < 1 or self.laplacian_k < 1:
            raise ValueError("neighbor counts must be >= 1")
        if self.base_seed < 0:
            raise ValueError("base_seed must be non-negative")
        if not self.methods:
            raise ValueError("at least one method is required")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError("duplicate methods")
        if self.classifier != "knn":
            raise ValueError(f"unsupported classifier {self.classifier!r}")

    def as_dict(self) -> dict:
        return {
            "repetitions": self.repetitions,
            "train_fraction": self.train_fraction,
            "base_seed": self.base_seed,
            "k_neighbors": self.k_neighbors,
            "sweep_max_fraction": self.sweep_max_fraction,
            "lowdim_fraction": self.lowdim_fraction,
            "methods": [m.value for m in self.methods],
            "laplacian_k": self.laplacian_k,
            "classifier": self.classifier,
        }


def feature_count_limit(n_features: int, fraction: float) -> int:
    """``floor(fraction * n_features)``, at least 1."""
    return max(1, math.floor(fraction * n_features + 1e-9))


def knn_predict(train: Dataset, query_rows, k: int) -> np.ndarray:
    """Majority vote among the ``k`` nearest training rows (Euclidean).

    Distance ties go to the lower training index. A vote tie goes to the
    tied label whose member is nearest to the query.
    """
    if train.n_samples == 0:
        raise DataError("empty training set")
    if not 1 <= k <= train.n_samples:
        raise ValueError(f"k must lie in [1, {train.n_samples}], got {k}")
    q = np.atleast_2d(np.asarray(query_rows, dtype=np.float64))
    x = np.ascontiguousarray(train.features)
    if q.shape[1] != x.shape[1]:
        raise ValueError(f"query has {q.shape[1]} features, training set has {x.shape[1]}")
    n_classes = max(train.n_classes, int(train.labels.max()) + 1)
    out = np.empty(q.shape[0], dtype=np.int64)
    for i, row in enumerate(q):
        diff = x - row
        d2 = np.einsum("ij,ij->i", diff, diff)
        nearest = np.argsort(d2, kind="stable")[:k]
        votes = np.bincount(train.labels[nearest], minlength=n_classes)
        tied = np.flatnonzero(votes == votes.max())
        if tied.size == 1:
            out[i] = tied[0]
        else:
            out[i] = next(lbl for lbl in train.labels[nearest] if lbl in tied)
    return out


def accuracy(predicted, actual) -> float:
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape or predicted.ndim != 1:
        raise ValueError("prediction and label vectors must be 1-D and of equal length")
    if predicted.size == 0:
        raise ValueError("cannot score an empty prediction vector")
    return float(np.mean(predicted == actual))


@dataclass(frozen=True)
class RepetitionResult:
    repetition: int
    seed: int
    rankings: dict[Method, FeatureRanking]
    accuracies: dict[Method, tuple[float, ...]]


def evaluate_split(split: SplitPair, config: ExperimentConfig, repetition: int = 0) -> RepetitionResult:
    """Rank on the training half and score kNN accuracy on the test half.

    Only ``split.train`` influences standardization and rankings.
    """
    train, test = split.train, split.test
    d = train.n_features
    if d == 0:
        raise DataError("dataset has no features")
    if test.n_samples == 0:
        raise DataError("split left the test half empty")
    if train.n_samples <= max(config.k_neighbors - 1, config.laplacian_k) or train.n_samples < 2:
        raise DataError(
            f"training half has {train.n_samples} rows; too few for k={config.k_neighbors} "
            f"and laplacian_k={config.laplacian_k}"
        )
    if len(np.unique(train.labels)) < 2:
        raise DataError("training half holds a single class")
    train_z, scaler = standardize(train)
    test_z = scaler.apply(test)
    m_max = feature_count_limit(d, config.sweep_max_fraction)

    rankings = {}
    accuracies = {}
    for method in config.methods:
        ranking = rank(train_z, method, k_neighbors=config.laplacian_k)
        rankings[method] = ranking
        accs = []
        for m in range(1, m_max + 1):
            cols = list(ranking.order[:m])
            pred = knn_predict(train_z.take_features(cols), test_z.features[:, cols], config.k_neighbors)
            accs.append(accuracy(pred, test.labels))
        accuracies[method] = tuple(accs)
    return RepetitionResult(repetition, split.seed, rankings, accuracies)


@dataclass(frozen=True)
class EvaluationReport:
    config: ExperimentConfig
    n_features: int
    feature_counts: tuple[int, ...]
    seeds: tuple[int, ...]
    # method -> (repetitions x feature_counts)
    per_repetition: dict[Method, np.ndarray]
    classifier: str = "knn"
    rankings: dict[Method, tuple[tuple[int, ...], ...]] = field(default_factory=dict)

    @property
    def mean_accuracy(self) -> dict[Method, np.ndarray]:
        return {m: a.mean(axis=0) for m, a in self.per_repetition.items()}

    @property
    def low_dim(self) -> dict[Method, float]:
        return mean_accuracy_low_dim(self)

    @property
    def low_dim_limit(self) -> int:
        return feature_count_limit(self.n_features, self.config.lowdim_fraction)


def run_sweep(data: Dataset, config: ExperimentConfig | None = None) -> EvaluationReport:
    """Run ``config.repetitions`` splits with seeds ``base_seed + r``."""
    config = config or ExperimentConfig()
    if data.n_features == 0:
        raise DataError("dataset has no features")
    results = []
    for r in range(config.repetitions):
        seed = config.base_seed + r
        split = stratified_split(data, config.train_fraction, seed)
        results.append(evaluate_split(split, config, r))
    m_max = feature_count_limit(data.n_features, config.sweep_max_fraction)
    per_rep = {
        m: np.array([res.accuracies[m] for res in results]) for m in config.methods
    }
    return EvaluationReport(
        config=config,
        n_features=data.n_features,
        feature_counts=tuple(range(1, m_max + 1)),
        seeds=tuple(res.seed for res in results),
        per_repetition=per_rep,
        classifier=config.classifier,
        rankings={m: tuple(res.rankings[m].order for res in results) for m in config.methods},
    )


def mean_accuracy_low_dim(report: EvaluationReport) -> dict[Method, float]:
    """Unweighted mean of cross-repetition accuracy over ``m = 1..floor(lowdim_fraction * d)``."""
    limit = report.low_dim_limit
    wanted = range(1, limit + 1)
    missing = [m for m in wanted if m not in report.feature_counts]
    if missing:
        raise ValueError(f"report lacks feature counts {missing}")
    idx = [report.feature_counts.index(m) for m in wanted]
    return {m: float(np.mean(acc.mean(axis=0)[idx])) for m, acc in report.per_repetition.items()}
