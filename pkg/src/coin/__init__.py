"""Contextual outlier interpretation.

Explains why an instance was flagged as an outlier: which attributes make it
abnormal, how abnormal it is, and which clusters of its neighborhood it is
being compared against.
"""

from .config import Config, load_config
from .context import build_context, kmeans, prediction_strength, resolve_context
from .data import Dataset, knn, load_dataset, save_dataset
from .detection import DetectionResult, detect_knn_distance
from .engine import (
    Interpretation,
    PriorKnowledge,
    interpret_all,
    interpret_outlier,
    overall_outlierness,
    prior_adjusted_cluster_outlierness,
)
from .exceptions import CoinError, ConfigError, DataError, DegenerateContextError, NotIsolatedError, SolverError
from .explainer import explain_against_cluster, fit_l1_maxmargin, select_penalty
from .sampler import SyntheticOutlierClass, expand_outlier

__all__ = [
    "CoinError", "Config", "ConfigError", "DataError", "Dataset", "DegenerateContextError", "DetectionResult",
    "Interpretation", "NotIsolatedError", "PriorKnowledge", "SolverError", "SyntheticOutlierClass",
    "build_context", "detect_knn_distance", "expand_outlier", "explain_against_cluster", "fit_l1_maxmargin",
    "interpret_all", "interpret_outlier", "kmeans", "knn", "load_config", "load_dataset", "overall_outlierness",
    "prediction_strength", "prior_adjusted_cluster_outlierness", "resolve_context", "save_dataset",
    "select_penalty",
]
