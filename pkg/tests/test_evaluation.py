"""Evaluation: ROC statistics, accuracy prediction, RMSE percentages."""

from __future__ import annotations

import io
import json
import math

import numpy as np
import pytest

from driftscope import (
    DataError,
    PredictorModel,
    SingleClassError,
    cross_val_predict,
    evaluate_model,
    expected_accuracy,
    rmse_percent,
    roc_auc,
    roc_curve,
)
from driftscope.evaluation import curve_area
from driftscope.metrics import DriftVector, ScoredExample
from driftscope.predictor import assemble_features


def _brute_force_auc(scores, labels) -> float:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    pos = scores[labels]
    neg = scores[~labels]
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def _random_instance(rng):
    n = int(rng.integers(2, 101))
    # coarse grid forces plenty of ties
    scores = rng.integers(0, 8, size=n) / 4.0
    labels = rng.random(n) < 0.5
    if labels.all() or not labels.any():
        labels[0] = ~labels[0]
    return scores, labels


class TestRocAuc:
    def test_perfect_separation(self):
        assert roc_auc([0.9, 0.8, 0.2, 0.1], [True, True, False, False]) == 1.0

    def test_all_ties_is_half(self):
        assert roc_auc([0.5] * 6, [True, False, True, False, True, False]) == 0.5

    def test_four_pair_fixture(self):
        got = roc_auc([0.9, 0.4, 0.5, 0.1], [True, True, False, False])
        assert got == 0.75

    def test_matches_pair_count_oracle_exactly(self):
        rng = np.random.default_rng(31)
        for _ in range(60):
            scores, labels = _random_instance(rng)
            assert roc_auc(scores, labels) == _brute_force_auc(scores, labels)

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(37)
        scores = rng.normal(size=300)
        labels = rng.random(300) < 0.4
        labels[0], labels[1] = True, False
        base = roc_auc(scores, labels)
        assert abs(roc_auc(np.exp(scores), labels) - base) <= 1e-12
        assert abs(roc_auc(3.0 * scores + 11.0, labels) - base) <= 1e-12

    def test_reversal_sums_to_one_for_tie_free_scores(self):
        rng = np.random.default_rng(41)
        scores = rng.permutation(40).astype(float)  # distinct by construction
        labels = rng.random(40) < 0.5
        labels[0], labels[1] = True, False
        assert roc_auc(scores, labels) + roc_auc(-scores, labels) == 1.0

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassError):
            roc_auc([0.1, 0.2], [True, True])


class TestRocCurve:
    def test_one_positive_above_one_negative(self):
        assert roc_curve([0.9, 0.1], [True, False]) == [(0.0, 0.0), (0.0, 1.0),
                                                        (1.0, 1.0)]

    def test_staircase_shape(self):
        rng = np.random.default_rng(43)
        scores, labels = _random_instance(rng)
        points = roc_curve(scores, labels)
        assert points[0] == (0.0, 0.0)
        assert points[-1] == (1.0, 1.0)
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        assert all(b >= a for a, b in zip(xs, xs[1:]))
        assert all(b >= a for a, b in zip(ys, ys[1:]))

    def test_area_agrees_with_rank_statistic(self):
        rng = np.random.default_rng(47)
        scores = np.round(rng.normal(size=1000), 1)  # rounding forces ties
        labels = rng.random(1000) < 0.5
        labels[0], labels[1] = True, False
        area = curve_area(roc_curve(scores, labels))
        assert abs(area - roc_auc(scores, labels)) <= 1e-12

    def test_reversed_scores_complement_area(self):
        rng = np.random.default_rng(53)
        scores = rng.normal(size=200)
        labels = rng.random(200) < 0.5
        labels[0], labels[1] = True, False
        area = curve_area(roc_curve(scores, labels))
        reversed_area = curve_area(roc_curve(-scores, labels))
        assert abs(area + reversed_area - 1.0) <= 1e-12

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassError):
            roc_curve([0.1, 0.2], [False, False])


class TestExpectedAccuracy:
    def test_uniform(self):
        assert expected_accuracy([0.8, 0.8, 0.8]) == pytest.approx(0.8, abs=1e-15)

    def test_extremes_average(self):
        assert expected_accuracy([1.0, 0.0]) == 0.5

    def test_three_values(self):
        assert expected_accuracy([0.9, 0.7, 0.5]) == pytest.approx(0.7, abs=1e-15)

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            expected_accuracy([])

    def test_out_of_range_rejected(self):
        with pytest.raises(DataError):
            expected_accuracy([0.5, 1.2])


class TestRmsePercent:
    def test_exact_prediction_is_zero_percent(self):
        metric, baseline, percent = rmse_percent([0.7, 0.6], [0.7, 0.6], 0.9)
        assert metric == 0.0
        assert baseline > 0.0
        assert percent == 0.0

    def test_hand_computed_fixture(self):
        metric, baseline, percent = rmse_percent([0.80, 0.70], [0.82, 0.68], 0.85)
        assert metric == pytest.approx(0.02, abs=1e-12)
        assert baseline == pytest.approx(math.sqrt((0.0009 + 0.0289) / 2), abs=1e-12)
        assert percent == pytest.approx(16.38, abs=0.01)

    def test_degenerate_baseline_flags_percent_absent(self):
        metric, baseline, percent = rmse_percent([0.7], [0.8], 0.8)
        assert metric == pytest.approx(0.1, abs=1e-12)
        assert baseline == 0.0
        assert percent is None

    def test_misaligned_inputs_rejected(self):
        with pytest.raises(DataError):
            rmse_percent([0.5], [0.5, 0.6], 0.7)


class TestRankingAccuracyDecoupling:
    """Example ranking quality and dataset accuracy prediction are
    separate abilities: either can be good while the other is poor."""

    def test_perfect_ranking_bad_accuracy(self):
        probs = [0.99, 0.98, 0.97, 0.96, 0.95, 0.94, 0.93, 0.92, 0.91, 0.90]
        labels = [True] * 5 + [False] * 5
        assert roc_auc(probs, labels) == 1.0
        assert abs(expected_accuracy(probs) - np.mean(labels)) > 0.4

    def test_useless_ranking_perfect_accuracy(self):
        probs = [0.5] * 10
        labels = [True] * 5 + [False] * 5
        assert roc_auc(probs, labels) == 0.5
        assert expected_accuracy(probs) == np.mean(labels)


def _unit_model(weight: float = -1.0) -> PredictorModel:
    return PredictorModel(feature_names=("vocabulary_drift",),
                          means=np.zeros(1), stds=np.ones(1),
                          weights=np.array([weight]), intercept=0.0)


def _scored(prefix: str, values, labels, domain="shifted") -> list[ScoredExample]:
    return [ScoredExample(vector=DriftVector(id=f"{prefix}{i}",
                                             vocabulary_drift=float(v)),
                          domain=domain, correct=bool(y))
            for i, (v, y) in enumerate(zip(values, labels))]


class TestEvaluateModel:
    def test_out_of_domain_report_by_hand(self):
        model = _unit_model()
        values = [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0]
        labels = [True, True, False, True, False, False]
        probs = [1.0 / (1.0 + math.exp(v)) for v in values]  # sigmoid(-v)
        report = evaluate_model(model, in_domain=[],
                                out_of_domain=[("shift", _scored("o", values, labels))],
                                in_domain_accuracy=0.9)
        d = report.datasets[0]
        assert d.role == "out-of-domain"
        assert d.n_examples == 6
        assert d.actual_accuracy == 0.5
        assert d.predicted_accuracy == pytest.approx(np.mean(probs), abs=1e-15)
        assert d.roc_auc == pytest.approx(8.0 / 9.0, abs=1e-15)
        assert d.domain == "shifted"
        expected_rmse = abs(np.mean(probs) - 0.5)
        assert report.rmse_metric == pytest.approx(expected_rmse, abs=1e-12)
        assert report.rmse_baseline == pytest.approx(0.4, abs=1e-12)
        assert report.rmse_percent == pytest.approx(100 * expected_rmse / 0.4,
                                                    abs=1e-9)
        assert report.mean_out_of_domain_roc_auc == pytest.approx(8.0 / 9.0)
        assert report.mean_in_domain_roc_auc is None

    def test_in_domain_uses_cross_validated_probabilities(self):
        rng = np.random.default_rng(59)
        values = rng.normal(size=60)
        labels = rng.random(60) < 1.0 / (1.0 + np.exp(values))
        labels[:2] = [True, False]
        rows = _scored("i", values, labels, domain="source")
        model = _unit_model()
        report = evaluate_model(model, in_domain=[("src", rows)], folds=5, seed=11)
        matrix = assemble_features([r.vector for r in rows],
                                   [r.correct for r in rows],
                                   model.feature_names)
        expected_probs = cross_val_predict(matrix, k=5, seed=11, ridge=model.ridge)
        d = report.datasets[0]
        assert d.predicted_accuracy == pytest.approx(float(expected_probs.mean()),
                                                     abs=1e-15)
        assert d.roc_auc == roc_auc(expected_probs, matrix.labels)
        assert report.in_domain_accuracy == pytest.approx(float(np.mean(labels)))

    def test_out_of_domain_uses_the_supplied_model(self):
        model = _unit_model(weight=0.7)
        values = [0.1, 0.4, -0.3, 2.0, -1.0]
        labels = [True, False, True, False, True]
        rows = _scored("o", values, labels)
        report = evaluate_model(model, in_domain=[], out_of_domain=[("x", rows)],
                                in_domain_accuracy=0.8)
        expected = model.predict_proba_batch(np.asarray(values).reshape(-1, 1))
        assert report.datasets[0].predicted_accuracy == pytest.approx(
            float(expected.mean()), abs=1e-15)

    def test_single_class_dataset_has_absent_auc(self):
        model = _unit_model()
        rows = _scored("o", [0.0, 1.0, 2.0], [True, True, True])
        report = evaluate_model(model, in_domain=[],
                                out_of_domain=[("uni", rows)],
                                in_domain_accuracy=0.8)
        d = report.datasets[0]
        assert d.roc_auc is None
        assert d.roc_auc_reason == "single-class"
        assert report.mean_out_of_domain_roc_auc is None

    def test_unlabeled_rows_rejected_naming_dataset(self):
        model = _unit_model()
        rows = _scored("o", [0.0, 1.0], [True, False])
        rows[1].correct = None
        with pytest.raises(DataError) as err:
            evaluate_model(model, in_domain=[], out_of_domain=[("noisy", rows)],
                           in_domain_accuracy=0.5)
        assert "noisy" in str(err.value)

    def test_missing_in_domain_accuracy_rejected(self):
        model = _unit_model()
        rows = _scored("o", [0.0, 1.0], [True, False])
        with pytest.raises(DataError):
            evaluate_model(model, in_domain=[], out_of_domain=[("x", rows)])

    def test_no_datasets_rejected(self):
        with pytest.raises(DataError):
            evaluate_model(_unit_model(), in_domain=[], out_of_domain=[],
                           in_domain_accuracy=0.5)

    def test_report_serialization(self):
        model = _unit_model()
        rows = _scored("o", [-1.0, 0.0, 1.0, 2.0], [True, True, False, False])
        report = evaluate_model(model, in_domain=[],
                                out_of_domain=[("shift", rows)],
                                in_domain_accuracy=0.75)
        sink = io.StringIO()
        report.write_json(sink)
        data = json.loads(sink.getvalue())
        assert {d["name"] for d in data["datasets"]} == {"shift"}
        assert data["aggregate"]["in_domain_accuracy"] == 0.75
        csv_sink = io.StringIO()
        report.write_csv(csv_sink)
        lines = csv_sink.getvalue().splitlines()
        assert len(lines) == 3  # header + 1 dataset + aggregate
        assert lines[0].startswith("name,role,domain,")
        assert lines[-1].startswith("aggregate,aggregate,")

    def test_no_out_of_domain_leaves_rmse_absent(self):
        rng = np.random.default_rng(61)
        values = rng.normal(size=40)
        labels = rng.random(40) < 0.5
        labels[:2] = [True, False]
        report = evaluate_model(_unit_model(),
                                in_domain=[("src", _scored("i", values, labels))])
        assert report.rmse_metric is None
        assert report.rmse_percent_reason == "no-out-of-domain-datasets"
