"""Filter feature selection with Confidence-Machine scores and baseline scorers."""

__version__ = "0.1.0"

from cmfs.errors import CmfsError, DataError, NumericError, ConvergenceError
from cmfs.dataset import Dataset, SplitPair, load_delimited, standardize, stratified_split
from cmfs.scoring import (
    Method,
    FeatureRanking,
    rank,
    rank_confidence_machine,
    rank_laplacian,
    rank_pca,
    rank_pearson,
    select_top,
)
from cmfs.evaluation import ExperimentConfig, EvaluationReport, run_sweep, mean_accuracy_low_dim

__all__ = [
    "__version__",
    "CmfsError",
    "DataError",
    "NumericError",
    "ConvergenceError",
    "Dataset",
    "SplitPair",
    "load_delimited",
    "standardize",
    "stratified_split",
    "Method",
    "FeatureRanking",
    "rank",
    "rank_confidence_machine",
    "rank_laplacian",
    "rank_pca",
    "rank_pearson",
    "select_top",
    "ExperimentConfig",
    "EvaluationReport",
    "run_sweep",
    "mean_accuracy_low_dim",
]
