"""Logistic regression from drift metrics to correctness probabilities.

Features are z-score standardized with fit-set statistics, then a
ridge-penalized logistic model (penalty on weights only, never the
intercept) is fit by iteratively reweighted least squares with
step-halving. First-order features only; no interaction terms.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError, ModelError, NumericalError, SingleClassError, UsageError
from .metrics import DriftVector, resolve_metrics

DEFAULT_RIDGE = 1e-6
GRADIENT_TOL = 1e-8
MAX_ITERATIONS = 100

MODEL_FORMAT = "driftscope-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class FeatureMatrix:
    """Rectangular drift-feature matrix with aligned correctness labels."""

    feature_names: tuple[str, ...]
    rows: np.ndarray          # (n, d) float64
    labels: np.ndarray        # (n,) bool
    ids: tuple[str, ...]
    excluded_ids: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def n_excluded(self) -> int:
        return len(self.excluded_ids)


def assemble_features(vectors: Sequence[DriftVector], labels: Sequence[bool],
                      metrics: Sequence[str] | None = None) -> FeatureMatrix:
    """Build a FeatureMatrix from drift vectors and aligned labels.

    Rows keep input order. Examples missing any selected metric are
    excluded and counted, never imputed. Single-class labels are a
    warning here and an error at fit time.
    """
    if len(vectors) != len(labels):
        raise DataError(f"{len(vectors)} drift vectors but {len(labels)} labels")
    names = tuple(resolve_metrics(metrics))
    kept_rows: list[list[float]] = []
    kept_labels: list[bool] = []
    kept_ids: list[str] = []
    excluded: list[str] = []
    for vector, label in zip(vectors, labels):
        values = [vector.value(name) for name in names]
        if any(v is None for v in values):
            excluded.append(vector.id)
            continue
        if not all(np.isfinite(v) for v in values):
            raise DataError(f"non-finite metric value for example '{vector.id}'")
        kept_rows.append([float(v) for v in values])
        kept_labels.append(bool(label))
        kept_ids.append(vector.id)
    if not kept_rows:
        raise DataError(
            f"all {len(vectors)} examples excluded: none carries every "
            f"selected metric ({', '.join(names)})")
    warnings = []
    if len(set(kept_labels)) < 2:
        warnings.append("labels contain a single class; fitting will fail")
    return FeatureMatrix(feature_names=names,
                         rows=np.asarray(kept_rows, dtype=np.float64),
                         labels=np.asarray(kept_labels, dtype=bool),
                         ids=tuple(kept_ids),
                         excluded_ids=tuple(excluded),
                         warnings=tuple(warnings))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _penalized_ll(z: np.ndarray, y: np.ndarray, w: np.ndarray, ridge: float) -> float:
    # log sigma(z) = -logaddexp(0, -z); log(1 - sigma(z)) = -logaddexp(0, z)
    ll = -float(np.logaddexp(0.0, np.where(y, -z, z)).sum())
    return ll - 0.5 * ridge * float(w @ w)


@dataclass
class PredictorModel:
    """Fitted logistic regression over standardized drift features."""

    feature_names: tuple[str, ...]
    means: np.ndarray
    stds: np.ndarray
    weights: np.ndarray       # on the standardized scale
    intercept: float
    ridge: float = DEFAULT_RIDGE
    diagnostics: dict = field(default_factory=dict)
    ll_path: tuple[float, ...] = field(default=(), repr=False)

    def raw_coefficients(self) -> tuple[np.ndarray, float]:
        """Weights and intercept on the original (unstandardized) scale."""
        raw_w = self.weights / self.stds
        raw_b = self.intercept - float(raw_w @ self.means)
        return raw_w, raw_b

    def _standardize(self, rows: np.ndarray) -> np.ndarray:
        return (rows - self.means) / self.stds

    def predict_proba_batch(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim == 1:
            rows = rows.reshape(1, -1)
        if rows.shape[1] != len(self.feature_names):
            raise DataError(f"feature vector has {rows.shape[1]} entries; "
                            f"model expects {len(self.feature_names)}")
        if not np.all(np.isfinite(rows)):
            raise NumericalError("non-finite feature value in prediction input")
        z = self._standardize(rows) @ self.weights + self.intercept
        return _sigmoid(z)

    def predict_proba(self, features: Sequence[float]) -> float:
        return float(self.predict_proba_batch(np.asarray(features, dtype=np.float64))[0])


def fit_logistic(m: FeatureMatrix, ridge: float = DEFAULT_RIDGE,
                 tol: float = GRADIENT_TOL, max_iter: int = MAX_ITERATIONS) -> PredictorModel:
    """Fit by IRLS (Newton) with step-halving.

    The penalized log-likelihood is nondecreasing across iterations.
    Convergence: gradient infinity-norm <= tol. Non-convergence within
    max_iter returns a model flagged in diagnostics, never silently.
    """
    y = m.labels
    n, d = m.rows.shape
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == n:
        raise SingleClassError(
            f"cannot fit: all {n} labels are {'positive' if n_pos else 'negative'}")
    if n < d + 1:
        raise DataError(f"need at least {d + 1} rows to fit {d} features; got {n}")

    means = m.rows.mean(axis=0)
    stds = m.rows.std(axis=0)
    stds = np.where(stds == 0.0, 1.0, stds)  # constant feature: z-column 0, weight stays 0
    Z = (m.rows - means) / stds
    yf = y.astype(np.float64)

    w = np.zeros(d)
    b = 0.0
    z_lin = np.zeros(n)
    ll = _penalized_ll(z_lin, y, w, ridge)
    ll_path = [ll]
    grad_norm = np.inf
    converged = False
    iterations = 0

    for iterations in range(1, max_iter + 1):
        p = _sigmoid(z_lin)
        resid = yf - p
        grad_w = Z.T @ resid - ridge * w
        grad_b = float(resid.sum())
        grad_norm = max(float(np.abs(grad_w).max(initial=0.0)), abs(grad_b))
        if grad_norm <= tol:
            converged = True
            iterations -= 1
            break
        weight = np.clip(p * (1.0 - p), 1e-10, None)
        H = np.empty((d + 1, d + 1))
        ZW = Z * weight[:, None]
        H[:d, :d] = Z.T @ ZW + ridge * np.eye(d)
        H[:d, d] = ZW.sum(axis=0)
        H[d, :d] = H[:d, d]
        H[d, d] = float(weight.sum())
        try:
            step = np.linalg.solve(H, np.concatenate([grad_w, [grad_b]]))
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"singular IRLS system at iteration {iterations}") from exc
        scale = 1.0
        for _ in range(60):
            w_new = w + scale * step[:d]
            b_new = b + scale * step[d]
            z_new = Z @ w_new + b_new
            ll_new = _penalized_ll(z_new, y, w_new, ridge)
            if ll_new >= ll:
                break
            scale *= 0.5
        else:
            converged = grad_norm <= tol
            break
        w, b, z_lin, ll = w_new, b_new, z_new, ll_new
        ll_path.append(ll)
    else:
        p = _sigmoid(z_lin)
        grad_w = Z.T @ (yf - p) - ridge * w
        grad_norm = max(float(np.abs(grad_w).max(initial=0.0)), abs(float((yf - p).sum())))
        converged = grad_norm <= tol

    if not np.all(np.isfinite(w)) or not np.isfinite(b):
        raise NumericalError("logistic fit produced non-finite parameters")
    return PredictorModel(feature_names=m.feature_names,
                          means=means,
                          stds=stds,
                          weights=w,
                          intercept=float(b),
                          ridge=ridge,
                          diagnostics={"iterations": iterations,
                                       "gradient_norm": grad_norm,
                                       "converged": converged},
                          ll_path=tuple(ll_path))


def cross_val_predict(m: FeatureMatrix, k: int = 5, seed: int = 0,
                      ridge: float = DEFAULT_RIDGE) -> np.ndarray:
    """Per-row probability from the model fit on the other k-1 folds.

    Rows are shuffled by a seeded permutation and split into k
    near-equal folds; output is returned in original row order and is
    deterministic given the seed. A row's own label never influences
    its prediction.
    """
    n = len(m.labels)
    if k < 2:
        raise UsageError(f"fold count must be at least 2; got {k}")
    if k > n:
        raise UsageError(f"fold count {k} exceeds row count {n}")
    perm = np.random.default_rng(seed).permutation(n)
    folds = np.array_split(perm, k)
    probs = np.empty(n, dtype=np.float64)
    for i, held_out in enumerate(folds):
        train_idx = np.setdiff1d(perm, held_out, assume_unique=True)
        train_labels = m.labels[train_idx]
        if len(np.unique(train_labels)) < 2:
            raise SingleClassError(
                f"training split for fold {i + 1} of {k} contains a single class")
        sub = FeatureMatrix(feature_names=m.feature_names,
                            rows=m.rows[train_idx],
                            labels=train_labels,
                            ids=tuple(m.ids[j] for j in train_idx))
        model = fit_logistic(sub, ridge=ridge)
        if len(held_out):
            probs[held_out] = model.predict_proba_batch(m.rows[held_out])
    return probs


def save_model(model: PredictorModel, path: str | Path) -> None:
    """Persist as canonical JSON; float round-trip is exact."""
    record = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "feature_names": list(model.feature_names),
        "means": [float(v) for v in model.means],
        "stds": [float(v) for v in model.stds],
        "weights": [float(v) for v in model.weights],
        "intercept": model.intercept,
        "ridge": model.ridge,
        "diagnostics": model.diagnostics,
    }
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(record, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    os.replace(tmp, path)


def load_model(path: str | Path) -> PredictorModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            record = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot read model file: {exc}") from exc
    if not isinstance(record, dict) or record.get("format") != MODEL_FORMAT:
        raise ModelError(f"not a {MODEL_FORMAT} file")
    if record.get("version", 0) > MODEL_VERSION:
        raise ModelError(f"model version {record.get('version')} is newer than "
                         f"supported version {MODEL_VERSION}")
    try:
        return PredictorModel(feature_names=tuple(record["feature_names"]),
                              means=np.asarray(record["means"], dtype=np.float64),
                              stds=np.asarray(record["stds"], dtype=np.float64),
                              weights=np.asarray(record["weights"], dtype=np.float64),
                              intercept=float(record["intercept"]),
                              ridge=float(record.get("ridge", DEFAULT_RIDGE)),
                              diagnostics=dict(record.get("diagnostics", {})))
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"malformed model file: {exc}") from exc
