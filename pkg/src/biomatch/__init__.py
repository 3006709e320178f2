"""Biometric template matching and verification/identification evaluation."""

from .evaluator import (
    CmcCurve,
    CrossValSummary,
    EvalReport,
    RocCurve,
    aggregate_folds,
    auc,
    cmc_curve,
    eer,
    identification_scores,
    roc_curve,
    summary_table,
    tar_at_far,
    tar_at_threshold,
    threshold_at_far,
)
from .matcher import (
    LabeledScores,
    RankList,
    ScoreMatrix,
    label_scores,
    rank_from_class_scores,
    rank_gallery,
    score_matrix,
    write_score_matrix_csv,
)
from .metrics import INFINITE_DISTANCE, METRIC_NAMES, distance
from .pipeline import FoldOutcome, run_identification, run_verification
from .templates import (
    FeatureTemplate,
    FoldSpec,
    LoadError,
    TemplateSet,
    l1_normalize,
    l1_normalize_set,
    load_templates,
    save_templates,
    split_folds,
)

__all__ = [
    "CmcCurve",
    "CrossValSummary",
    "EvalReport",
    "FeatureTemplate",
    "FoldOutcome",
    "FoldSpec",
    "INFINITE_DISTANCE",
    "LabeledScores",
    "LoadError",
    "METRIC_NAMES",
    "RankList",
    "RocCurve",
    "ScoreMatrix",
    "TemplateSet",
    "aggregate_folds",
    "auc",
    "cmc_curve",
    "distance",
    "eer",
    "identification_scores",
    "l1_normalize",
    "l1_normalize_set",
    "label_scores",
    "load_templates",
    "rank_from_class_scores",
    "rank_gallery",
    "roc_curve",
    "run_identification",
    "run_verification",
    "save_templates",
    "score_matrix",
    "split_folds",
    "summary_table",
    "tar_at_far",
    "tar_at_threshold",
    "threshold_at_far",
    "write_score_matrix_csv",
]

__version__ = "0.1.0"
