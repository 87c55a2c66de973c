"""Drift metrics between evaluation examples and a training corpus, with
example-level correctness prediction and dataset-level evaluation."""

from .errors import (
    DataError,
    DriftscopeError,
    MetricUnavailable,
    ModelError,
    NumericalError,
    ParseError,
    ProfileError,
    SingleClassError,
    UsageError,
    ValidationError,
)
from .schema import (
    SCHEMA_NAME,
    UNK_TAG,
    UPOS_TAGS,
    AnnotatedExample,
    AnnotatedToken,
    ValidationSummary,
    load_corpus,
    parse_example,
    serialize_example,
    validate_corpus,
    write_corpus,
)
from .profile import (
    DEFAULT_OOV_FLOOR,
    DEFAULT_SMOOTHING_K,
    TrainProfile,
    build_profile,
    load_profile,
    merge_profiles,
    save_profile,
)
from .metrics import (
    METRIC_NAMES,
    DriftVector,
    ScoredExample,
    embedding_cosine_distance,
    js_divergence,
    mean_pairwise_cosine,
    read_scores_jsonl,
    resolve_metrics,
    score_example,
    semantic_drift,
    structural_drift,
    token_cross_entropy,
    token_js_divergence,
    vocabulary_drift,
    write_scores_csv,
    write_scores_jsonl,
)
from .predictor import (
    DEFAULT_RIDGE,
    FeatureMatrix,
    PredictorModel,
    assemble_features,
    cross_val_predict,
    fit_logistic,
    load_model,
    save_model,
)
from .evaluation import (
    DatasetEval,
    EvalReport,
    evaluate_model,
    expected_accuracy,
    rmse_percent,
    roc_auc,
    roc_curve,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotatedExample",
    "AnnotatedToken",
    "DEFAULT_OOV_FLOOR",
    "DEFAULT_RIDGE",
    "DEFAULT_SMOOTHING_K",
    "DataError",
    "DatasetEval",
    "DriftVector",
    "DriftscopeError",
    "EvalReport",
    "FeatureMatrix",
    "METRIC_NAMES",
    "MetricUnavailable",
    "ModelError",
    "NumericalError",
    "ParseError",
    "PredictorModel",
    "ProfileError",
    "SCHEMA_NAME",
    "ScoredExample",
    "SingleClassError",
    "TrainProfile",
    "UNK_TAG",
    "UPOS_TAGS",
    "UsageError",
    "ValidationError",
    "ValidationSummary",
    "assemble_features",
    "build_profile",
    "cross_val_predict",
    "embedding_cosine_distance",
    "evaluate_model",
    "expected_accuracy",
    "fit_logistic",
    "js_divergence",
    "load_corpus",
    "load_model",
    "load_profile",
    "mean_pairwise_cosine",
    "merge_profiles",
    "parse_example",
    "read_scores_jsonl",
    "resolve_metrics",
    "rmse_percent",
    "roc_auc",
    "roc_curve",
    "save_model",
    "save_profile",
    "score_example",
    "semantic_drift",
    "serialize_example",
    "structural_drift",
    "token_cross_entropy",
    "token_js_divergence",
    "validate_corpus",
    "vocabulary_drift",
    "write_corpus",
    "write_scores_csv",
    "write_scores_jsonl",
]
