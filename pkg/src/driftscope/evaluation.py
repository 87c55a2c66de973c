"""Predictor quality scoring: ROC AUC, expected accuracy, RMSE percent.

Protocol: in-domain datasets are scored with cross-validated
probabilities; out-of-domain datasets with the supplied model fit on
the full in-domain data. The RMSE of predicted vs. actual dataset
accuracy is reported as a percentage of the no-performance-drop
baseline, which predicts every out-of-domain accuracy to equal the
in-domain evaluation accuracy.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from .errors import DataError, SingleClassError
from .metrics import ScoredExample
from .predictor import PredictorModel, assemble_features, cross_val_predict

IN_DOMAIN = "in-domain"
OUT_OF_DOMAIN = "out-of-domain"
SINGLE_CLASS = "single-class"
BASELINE_ZERO = "baseline-rmse-zero"
NO_OOD_DATASETS = "no-out-of-domain-datasets"


def roc_auc(scores, labels) -> float:
    """Mann-Whitney rank statistic: P(random positive scored above a
    random negative), ties counted half. Exact for float scores."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise DataError("scores and labels must be aligned 1-d sequences")
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassError("ROC AUC requires both classes")
    _, inverse, counts = np.unique(scores, return_inverse=True, return_counts=True)
    ends = np.cumsum(counts)
    average_ranks = ends - counts + (counts + 1) / 2.0  # 1-based, ties averaged
    rank_sum_pos = float(average_ranks[inverse][labels].sum())
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def roc_curve(scores, labels) -> list[tuple[float, float]]:
    """Staircase of (false-positive rate, recall) points from (0,0) to
    (1,1), one point per distinct threshold."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassError("ROC curve requires both classes")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    true_pos = np.cumsum(sorted_labels)
    false_pos = np.cumsum(~sorted_labels)
    boundaries = np.append(np.where(np.diff(sorted_scores) != 0.0)[0], len(scores) - 1)
    points = [(0.0, 0.0)]
    points.extend((false_pos[i] / n_neg, true_pos[i] / n_pos) for i in boundaries)
    return points


def curve_area(points: Sequence[tuple[float, float]]) -> float:
    """Trapezoidal area under a (fpr, recall) staircase."""
    xs = np.asarray([p[0] for p in points])
    ys = np.asarray([p[1] for p in points])
    return float(np.trapezoid(ys, xs))


def expected_accuracy(probabilities) -> float:
    """Arithmetic mean of per-example correctness probabilities."""
    probs = np.asarray(probabilities, dtype=np.float64)
    if probs.size == 0:
        raise DataError("cannot take expected accuracy of an empty dataset")
    if np.any(probs < 0.0) or np.any(probs > 1.0) or not np.all(np.isfinite(probs)):
        raise DataError("probabilities must lie in [0, 1]")
    return float(probs.mean())


def rmse_percent(predicted, actual, in_domain_accuracy: float
                 ) -> tuple[float, float, float | None]:
    """(rmse_metric, rmse_baseline, percent) over per-dataset accuracies.

    percent = 100 * rmse_metric / rmse_baseline, None when the baseline
    is degenerate (zero).
    """
    predicted = np.asarray(predicted, dtype=np.float64)
    actual = np.asarray(actual, dtype=np.float64)
    if predicted.shape != actual.shape or predicted.ndim != 1 or predicted.size == 0:
        raise DataError("predicted and actual accuracy lists must be aligned and nonempty")
    rmse_metric = float(np.sqrt(np.mean((predicted - actual) ** 2)))
    rmse_baseline = float(np.sqrt(np.mean((in_domain_accuracy - actual) ** 2)))
    percent = 100.0 * rmse_metric / rmse_baseline if rmse_baseline > 0.0 else None
    return rmse_metric, rmse_baseline, percent


@dataclass
class DatasetEval:
    """Evaluation record for one labeled, scored dataset."""

    name: str
    role: str                       # in-domain | out-of-domain
    domain: str | None
    n_examples: int
    n_excluded: int
    actual_accuracy: float
    predicted_accuracy: float
    roc_auc: float | None
    roc_auc_reason: str | None = None
    # carried for figure rendering, not serialized
    probabilities: np.ndarray | None = field(default=None, repr=False, compare=False)
    labels: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        record = {
            "name": self.name,
            "role": self.role,
            "domain": self.domain,
            "n_examples": self.n_examples,
            "n_excluded": self.n_excluded,
            "actual_accuracy": self.actual_accuracy,
            "predicted_accuracy": self.predicted_accuracy,
            "roc_auc": self.roc_auc,
        }
        if self.roc_auc is None:
            record["roc_auc_reason"] = self.roc_auc_reason
        return record


@dataclass
class EvalReport:
    """Per-dataset records plus the aggregate block."""

    datasets: list[DatasetEval]
    in_domain_accuracy: float
    mean_in_domain_roc_auc: float | None
    mean_out_of_domain_roc_auc: float | None
    rmse_metric: float | None
    rmse_baseline: float | None
    rmse_percent: float | None
    rmse_percent_reason: str | None = None

    def to_dict(self) -> dict:
        return {
            "datasets": [d.to_dict() for d in self.datasets],
            "aggregate": {
                "in_domain_accuracy": self.in_domain_accuracy,
                "mean_in_domain_roc_auc": self.mean_in_domain_roc_auc,
                "mean_out_of_domain_roc_auc": self.mean_out_of_domain_roc_auc,
                "rmse_metric": self.rmse_metric,
                "rmse_baseline": self.rmse_baseline,
                "rmse_percent": self.rmse_percent,
                "rmse_percent_reason": self.rmse_percent_reason,
            },
        }

    def write_json(self, sink: IO[str]) -> None:
        json.dump(self.to_dict(), sink, sort_keys=True, separators=(",", ":"))
        sink.write("\n")

    def write_csv(self, sink: IO[str]) -> None:
        """Flat table: one row per dataset plus a final aggregate row."""
        columns = ["name", "role", "domain", "n_examples", "n_excluded",
                   "actual_accuracy", "predicted_accuracy", "roc_auc",
                   "roc_auc_reason", "in_domain_accuracy",
                   "mean_in_domain_roc_auc", "mean_out_of_domain_roc_auc",
                   "rmse_metric", "rmse_baseline", "rmse_percent",
                   "rmse_percent_reason"]

        def cell(value) -> str:
            if value is None:
                return ""
            if isinstance(value, float):
                return repr(value)
            return str(value)

        sink.write(",".join(columns) + "\n")
        for d in self.datasets:
            row = [d.name, d.role, cell(d.domain), str(d.n_examples),
                   str(d.n_excluded), cell(d.actual_accuracy),
                   cell(d.predicted_accuracy), cell(d.roc_auc),
                   cell(d.roc_auc_reason), "", "", "", "", "", "", ""]
            sink.write(",".join(row) + "\n")
        aggregate = ["aggregate", "aggregate", "", "", "", "", "", "", "",
                     cell(self.in_domain_accuracy),
                     cell(self.mean_in_domain_roc_auc),
                     cell(self.mean_out_of_domain_roc_auc),
                     cell(self.rmse_metric), cell(self.rmse_baseline),
                     cell(self.rmse_percent), cell(self.rmse_percent_reason)]
        sink.write(",".join(aggregate) + "\n")


def _majority_domain(rows: Sequence[ScoredExample]) -> str | None:
    tally = Counter(r.domain for r in rows if r.domain is not None)
    if not tally:
        return None
    return min(tally, key=lambda d: (-tally[d], d))


def _evaluate_dataset(name: str, role: str, rows: Sequence[ScoredExample],
                      model: PredictorModel, folds: int, seed: int,
                      ridge: float) -> DatasetEval:
    if not rows:
        raise DataError(f"dataset '{name}' is empty")
    unlabeled = sum(1 for r in rows if r.correct is None)
    if unlabeled:
        raise DataError(f"dataset '{name}' has {unlabeled} examples without "
                        f"a correctness label")
    vectors = [r.vector for r in rows]
    labels = [bool(r.correct) for r in rows]
    try:
        matrix = assemble_features(vectors, labels, model.feature_names)
    except DataError as exc:
        raise DataError(f"dataset '{name}': {exc}") from exc
    try:
        if role == IN_DOMAIN:
            probs = cross_val_predict(matrix, k=folds, seed=seed, ridge=ridge)
        else:
            probs = model.predict_proba_batch(matrix.rows)
    except SingleClassError as exc:
        raise SingleClassError(f"dataset '{name}': {exc}") from exc
    try:
        auc: float | None = roc_auc(probs, matrix.labels)
        reason = None
    except SingleClassError:
        auc, reason = None, SINGLE_CLASS
    return DatasetEval(name=name,
                       role=role,
                       domain=_majority_domain(rows),
                       n_examples=len(matrix.labels),
                       n_excluded=matrix.n_excluded,
                       actual_accuracy=float(matrix.labels.mean()),
                       predicted_accuracy=expected_accuracy(probs),
                       roc_auc=auc,
                       roc_auc_reason=reason,
                       probabilities=probs,
                       labels=matrix.labels)


def evaluate_model(model: PredictorModel,
                   in_domain: Sequence[tuple[str, Sequence[ScoredExample]]],
                   out_of_domain: Sequence[tuple[str, Sequence[ScoredExample]]] = (),
                   folds: int = 5, seed: int = 0,
                   ridge: float | None = None,
                   in_domain_accuracy: float | None = None) -> EvalReport:
    """Evaluate a fitted model over scored, labeled datasets.

    in_domain_accuracy defaults to the pooled actual accuracy of the
    in-domain datasets; it anchors the no-performance-drop baseline.
    """
    if not in_domain and not out_of_domain:
        raise DataError("no datasets to evaluate")
    if ridge is None:
        ridge = model.ridge
    datasets: list[DatasetEval] = []
    for name, rows in in_domain:
        datasets.append(_evaluate_dataset(name, IN_DOMAIN, rows, model,
                                          folds, seed, ridge))
    for name, rows in out_of_domain:
        datasets.append(_evaluate_dataset(name, OUT_OF_DOMAIN, rows, model,
                                          folds, seed, ridge))

    if in_domain_accuracy is None:
        in_rows = [d for d in datasets if d.role == IN_DOMAIN]
        if not in_rows:
            raise DataError("in-domain accuracy must be supplied when no "
                            "in-domain dataset is evaluated")
        total = sum(d.n_examples for d in in_rows)
        in_domain_accuracy = sum(d.actual_accuracy * d.n_examples for d in in_rows) / total
    if not 0.0 <= in_domain_accuracy <= 1.0:
        raise DataError(f"in-domain accuracy {in_domain_accuracy} outside [0, 1]")

    def mean_auc(role: str) -> float | None:
        values = [d.roc_auc for d in datasets if d.role == role and d.roc_auc is not None]
        return float(np.mean(values)) if values else None

    ood = [d for d in datasets if d.role == OUT_OF_DOMAIN]
    if ood:
        metric, baseline, percent = rmse_percent([d.predicted_accuracy for d in ood],
                                                 [d.actual_accuracy for d in ood],
                                                 in_domain_accuracy)
        percent_reason = BASELINE_ZERO if percent is None else None
    else:
        metric = baseline = percent = None
        percent_reason = NO_OOD_DATASETS
    return EvalReport(datasets=datasets,
                      in_domain_accuracy=float(in_domain_accuracy),
                      mean_in_domain_roc_auc=mean_auc(IN_DOMAIN),
                      mean_out_of_domain_roc_auc=mean_auc(OUT_OF_DOMAIN),
                      rmse_metric=metric,
                      rmse_baseline=baseline,
                      rmse_percent=percent,
                      rmse_percent_reason=percent_reason)
