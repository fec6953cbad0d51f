"""Random-forest surrogate models over TDC run outcomes.

forest: CART regression trees and bootstrap forests built from first
principles.  models: feature schemas, the per-set / general / averaging /
nearest-neighbour model families, MAPE scoring, and grid search.  persist:
versioned flat-file model storage.
"""

from .forest import (
    EmptyTrainingError,
    ForestHyperparams,
    RandomForest,
    RegressionTree,
    train_forest,
    train_tree,
)
from .models import (
    TARGETS,
    AllTargetsZeroError,
    EvalReport,
    FeatureSchema,
    InvalidKError,
    NoModelsError,
    SurrogateForest,
    TargetScore,
    TooFewSetsError,
    evaluate,
    family_reports,
    grid_search,
    mape,
    predict_average_ensemble,
    predict_knn_ensemble,
    train_each,
    train_general,
)
from .persist import ModelFormatError, load_model, save_model

__all__ = [
    "AllTargetsZeroError",
    "EmptyTrainingError",
    "EvalReport",
    "FeatureSchema",
    "ForestHyperparams",
    "InvalidKError",
    "ModelFormatError",
    "NoModelsError",
    "RandomForest",
    "RegressionTree",
    "SurrogateForest",
    "TARGETS",
    "TargetScore",
    "TooFewSetsError",
    "evaluate",
    "family_reports",
    "grid_search",
    "load_model",
    "mape",
    "predict_average_ensemble",
    "predict_knn_ensemble",
    "save_model",
    "train_each",
    "train_forest",
    "train_general",
    "train_tree",
]
