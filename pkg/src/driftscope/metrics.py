"""Per-example drift metrics against a training profile.

Six metrics: three decomposed dimensions (vocabulary, structural,
semantic) and three baselines (subword Jensen-Shannon divergence, subword
cross-entropy, example embedding cosine distance). All are oriented so
larger means more drift. Each metric either returns a finite value or
raises MetricUnavailable with a reason code; `score_example` wraps them
into a DriftVector with the codes recorded as flags.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError, MetricUnavailable, ParseError, UsageError
from .profile import (
    CONTEXT_LEN,
    DEFAULT_OOV_FLOOR,
    DEFAULT_SMOOTHING_K,
    SEP_TAG,
    TrainProfile,
)
from .schema import AnnotatedExample

# Reason codes for absent metrics.
NO_CONTENT_TOKENS = "no-content-tokens"
TOO_SHORT = "too-short"
NO_SHARED_TOKENS = "no-shared-tokens"
NO_EMBEDDINGS = "no-embeddings"
NO_SUBWORD_TOKENS = "no-subword-tokens"

METRIC_NAMES = (
    "vocabulary_drift",
    "structural_drift",
    "semantic_drift",
    "token_js_divergence",
    "token_cross_entropy",
    "embedding_cosine_distance",
)

_ALIASES = {
    "vocabulary": "vocabulary_drift",
    "structural": "structural_drift",
    "semantic": "semantic_drift",
    "js": "token_js_divergence",
    "token_js": "token_js_divergence",
    "cross_entropy": "token_cross_entropy",
    "token_cross_entropy": "token_cross_entropy",
    "cosine": "embedding_cosine_distance",
    "embedding_cosine": "embedding_cosine_distance",
}


def resolve_metrics(selection: Iterable[str] | None) -> list[str]:
    """Map metric names or aliases onto canonical names, in canonical order."""
    if selection is None:
        return list(METRIC_NAMES)
    chosen = set()
    for raw in selection:
        name = raw.strip().lower().replace("-", "_")
        if name in METRIC_NAMES:
            chosen.add(name)
        elif name in _ALIASES:
            chosen.add(_ALIASES[name])
        else:
            raise UsageError(f"unknown metric '{raw}'")
    return [m for m in METRIC_NAMES if m in chosen]


def _clamp(value: float, lo: float, hi: float) -> float:
    return max(lo, min(hi, value))


def _mean_normed(vectors) -> np.ndarray:
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.size == 0:
        raise DataError("empty vector set")
    norms = np.linalg.norm(arr, axis=1)
    if not np.all(np.isfinite(norms)) or np.any(norms == 0.0):
        raise DataError("vector set contains a zero or non-finite vector")
    return (arr / norms[:, None]).mean(axis=0)


def mean_pairwise_cosine(u_vectors, v_vectors) -> float:
    """Mean cosine similarity over all (u, v) pairs.

    Computed as the dot product of the two mean-normed vectors, which
    equals the brute-force pairwise mean exactly.
    """
    return float(_mean_normed(u_vectors) @ _mean_normed(v_vectors))


def js_divergence(p_weights: Mapping[str, float], q_weights: Mapping[str, float]) -> float:
    """Jensen-Shannon divergence (base-2 logs) between two weight maps.

    Weights are normalized to distributions; zero-weight entries
    contribute nothing. Runs in O(support of p) plus a mass correction
    for the q-only support, so neither side needs densifying.
    """
    p_total = sum(p_weights.values())
    q_total = sum(q_weights.values())
    if p_total <= 0 or q_total <= 0:
        raise DataError("distributions must have positive total weight")
    kl_p = 0.0
    kl_q_shared = 0.0
    q_shared_mass = 0.0
    for key, pw in p_weights.items():
        if pw == 0:
            continue
        p = pw / p_total
        qw = q_weights.get(key, 0)
        if qw == 0:
            kl_p += p  # m = p/2, so log2(p/m) = 1
            continue
        q = qw / q_total
        m = (p + q) / 2.0
        kl_p += p * math.log2(p / m)
        kl_q_shared += q * math.log2(q / m)
        q_shared_mass += q
    kl_q = kl_q_shared + (1.0 - q_shared_mass)
    return _clamp((kl_p + kl_q) / 2.0, 0.0, 1.0)


def vocabulary_drift(example: AnnotatedExample, profile: TrainProfile,
                     floor: float = DEFAULT_OOV_FLOOR) -> float:
    """Cross-entropy of the example's content words under the training
    content-word unigram distribution, in nats."""
    surfaces = example.content_surfaces
    if not surfaces:
        raise MetricUnavailable(NO_CONTENT_TOKENS)
    total = sum(profile.content_unigram_logprob(w, floor) for w in surfaces)
    return -total / len(surfaces)


def structural_drift(example: AnnotatedExample, profile: TrainProfile,
                     k: float = DEFAULT_SMOOTHING_K) -> float:
    """Cross-entropy of the example's POS tag sequence under the training
    POS 5-gram model, in nats. Needs at least two tokens."""
    tags = tuple(t.pos_tag for t in example.tokens)
    if len(tags) < 2:
        raise MetricUnavailable(TOO_SHORT)
    padded = (SEP_TAG,) * CONTEXT_LEN + tags
    total = 0.0
    for i in range(CONTEXT_LEN, len(padded)):
        total += profile.pos_ngram_logprob(padded[i - CONTEXT_LEN:i], padded[i], k)
    return -total / len(tags)


def semantic_drift(example: AnnotatedExample, profile: TrainProfile) -> float:
    """Mean lexical semantic change over content tokens shared with the
    training corpus.

    For each shared surface the change is one minus the dot product of
    the mean-normed embeddings on the two sides, which equals the mean
    pairwise cosine distance over occurrence pairs.
    """
    if not example.content_surfaces:
        raise MetricUnavailable(NO_CONTENT_TOKENS)
    occurrences: dict[str, list[np.ndarray]] = {}
    for token in example.tokens:
        if token.is_content and token.embedding is not None:
            vec = np.asarray(token.embedding, dtype=np.float64)
            occurrences.setdefault(token.surface, []).append(vec / np.linalg.norm(vec))
    if not occurrences or not profile.token_embeddings.sums:
        raise MetricUnavailable(NO_EMBEDDINGS)
    shared = [w for w in occurrences if w in profile.token_embeddings.sums]
    if not shared:
        raise MetricUnavailable(NO_SHARED_TOKENS)
    total = 0.0
    for surface in shared:
        example_mean = np.mean(occurrences[surface], axis=0)
        train_mean = profile.token_mean_normed_embedding(surface)
        if example_mean.shape != train_mean.shape:
            raise DataError(
                f"token embedding dimension mismatch for '{surface}': "
                f"{example_mean.shape[0]} vs {train_mean.shape[0]}")
        total += 1.0 - float(example_mean @ train_mean)
    return _clamp(total / len(shared), 0.0, 2.0)


def token_js_divergence(example: AnnotatedExample, profile: TrainProfile) -> float:
    """Jensen-Shannon divergence (bits) between the example's subword
    distribution and the training subword distribution."""
    if not example.subword_tokens or profile.subword_unigrams.total == 0:
        raise MetricUnavailable(NO_SUBWORD_TOKENS)
    return js_divergence(Counter(example.subword_tokens), profile.subword_unigrams.counts)


def token_cross_entropy(example: AnnotatedExample, profile: TrainProfile,
                        floor: float = DEFAULT_OOV_FLOOR) -> float:
    """Cross-entropy of the example's subwords under the training subword
    unigram distribution, in nats."""
    if not example.subword_tokens or profile.subword_unigrams.total == 0:
        raise MetricUnavailable(NO_SUBWORD_TOKENS)
    total = sum(profile.subword_unigram_logprob(w, floor) for w in example.subword_tokens)
    return -total / len(example.subword_tokens)


def embedding_cosine_distance(example: AnnotatedExample, profile: TrainProfile) -> float:
    """Mean cosine distance from the example embedding to all training
    example embeddings, via the stored mean-normed training vector."""
    corpus_mean = profile.corpus_mean_normed_embedding()
    if example.example_embedding is None or corpus_mean is None:
        raise MetricUnavailable(NO_EMBEDDINGS)
    vec = np.asarray(example.example_embedding, dtype=np.float64)
    if vec.shape != corpus_mean.shape:
        raise DataError(f"example embedding dimension mismatch: "
                        f"{vec.shape[0]} vs {corpus_mean.shape[0]}")
    vec = vec / np.linalg.norm(vec)
    return _clamp(1.0 - float(vec @ corpus_mean), 0.0, 2.0)


@dataclass
class DriftVector:
    """All computed drift metrics for one example.

    Absent metrics are None with the reason code recorded in `flags`.
    """

    id: str
    vocabulary_drift: float | None = None
    structural_drift: float | None = None
    semantic_drift: float | None = None
    token_js_divergence: float | None = None
    token_cross_entropy: float | None = None
    embedding_cosine_distance: float | None = None
    flags: dict[str, str] = field(default_factory=dict)

    def value(self, metric: str) -> float | None:
        if metric not in METRIC_NAMES:
            raise UsageError(f"unknown metric '{metric}'")
        return getattr(self, metric)


def score_example(example: AnnotatedExample, profile: TrainProfile,
                  metrics: Sequence[str] | None = None,
                  floor: float = DEFAULT_OOV_FLOOR,
                  k: float = DEFAULT_SMOOTHING_K) -> DriftVector:
    """Compute the selected metrics for one example.

    Deterministic; per-metric absences are recorded as flags, never
    raised.
    """
    selected = resolve_metrics(metrics)
    compute = {
        "vocabulary_drift": lambda: vocabulary_drift(example, profile, floor),
        "structural_drift": lambda: structural_drift(example, profile, k),
        "semantic_drift": lambda: semantic_drift(example, profile),
        "token_js_divergence": lambda: token_js_divergence(example, profile),
        "token_cross_entropy": lambda: token_cross_entropy(example, profile, floor),
        "embedding_cosine_distance": lambda: embedding_cosine_distance(example, profile),
    }
    vector = DriftVector(id=example.id)
    for name in selected:
        try:
            setattr(vector, name, compute[name]())
        except MetricUnavailable as exc:
            vector.flags[name] = exc.reason
    return vector


# --- score-record serialization -----------------------------------------

@dataclass
class ScoredExample:
    """One row of a drift-score file: metrics plus pass-through context."""

    vector: DriftVector
    domain: str | None = None
    correct: bool | None = None


def to_score_record(scored: ScoredExample, metrics: Sequence[str]) -> dict:
    record: dict = {"id": scored.vector.id}
    if scored.domain is not None:
        record["domain"] = scored.domain
    record["metrics"] = {m: scored.vector.value(m) for m in metrics}
    record["flags"] = {m: r for m, r in scored.vector.flags.items() if m in metrics}
    if scored.correct is not None:
        record["correct"] = scored.correct
    return record


def write_scores_jsonl(scored: Iterable[ScoredExample], sink: IO[str],
                       metrics: Sequence[str]) -> int:
    n = 0
    for row in scored:
        sink.write(json.dumps(to_score_record(row, metrics), separators=(",", ":")) + "\n")
        n += 1
    return n


def write_scores_csv(scored: Iterable[ScoredExample], sink: IO[str],
                     metrics: Sequence[str]) -> int:
    """Flat export: one column per metric, empty cell for absent values."""
    columns = ["id", "domain", "correct", *metrics]
    sink.write(",".join(columns) + "\n")
    n = 0
    for row in scored:
        cells = [row.vector.id,
                 "" if row.domain is None else row.domain,
                 "" if row.correct is None else str(row.correct).lower()]
        for m in metrics:
            value = row.vector.value(m)
            cells.append("" if value is None else repr(value))
        sink.write(",".join(cells) + "\n")
        n += 1
    return n


def read_scores_jsonl(source: str | Path | IO[str]) -> list[ScoredExample]:
    """Read a drift-score file written by `write_scores_jsonl`."""
    if isinstance(source, (str, Path)):
        fh = open(source, "r", encoding="utf-8")
        close = True
    else:
        fh, close = source, False
    rows: list[ScoredExample] = []
    try:
        for line_number, line in enumerate(fh, start=1):
            if line.strip() == "":
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON in score file: {exc.msg}",
                                 line=line_number) from exc
            if not isinstance(obj, dict) or "id" not in obj or "metrics" not in obj:
                raise ParseError("score record must carry 'id' and 'metrics'",
                                 line=line_number)
            vector = DriftVector(id=obj["id"])
            for name, value in obj["metrics"].items():
                if name in METRIC_NAMES and value is not None:
                    setattr(vector, name, float(value))
            for name, reason in obj.get("flags", {}).items():
                if name in METRIC_NAMES:
                    vector.flags[name] = reason
            rows.append(ScoredExample(vector=vector,
                                      domain=obj.get("domain"),
                                      correct=obj.get("correct")))
    finally:
        if close:
            fh.close()
    return rows
