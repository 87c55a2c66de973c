"""Sufficient statistics of a training corpus.

A TrainProfile holds everything the drift metrics need from the training
side: content-word and subword unigram counts, POS 5-gram counts, per
token mean-normed contextual embeddings, and the corpus-level mean-normed
example embedding. Profiles form a monoid under `merge_profiles`, so
sharded builds compose exactly.
"""

from __future__ import annotations

import json
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .errors import DataError, ProfileError
from .schema import AnnotatedExample, UNK_TAG, UPOS_TAGS

PROFILE_FORMAT = "driftscope-profile"
PROFILE_VERSION = 1

#: Sentinel used to left-pad POS sequences so every position has a full context.
SEP_TAG = "[SEP]"
NGRAM_ORDER = 5
CONTEXT_LEN = NGRAM_ORDER - 1

#: Smoothing vocabulary: [SEP] plus the 17 UPOS tags. UNK is scored with
#: the zero-count smoothing mass and never enters the vocabulary.
TAG_VOCAB_SIZE = 1 + len(UPOS_TAGS)

DEFAULT_SMOOTHING_K = 0.1
DEFAULT_OOV_FLOOR = 1e-10


@dataclass
class UnigramTable:
    counts: Counter[str] = field(default_factory=Counter)
    total: int = 0

    def add(self, token: str, n: int = 1) -> None:
        self.counts[token] += n
        self.total += n

    def merge(self, other: UnigramTable) -> None:
        for token, n in other.counts.items():
            self.counts[token] += n
        self.total += other.total

    def logprob(self, token: str, floor: float = DEFAULT_OOV_FLOOR) -> float:
        """Natural-log MLE probability, floored at ln(floor) for unseen tokens."""
        count = self.counts.get(token, 0)
        if count == 0:
            return math.log(floor)
        return math.log(count / self.total)


@dataclass
class PosNgramTable:
    """Counts for a POS 5-gram model over the fixed 18-symbol vocabulary.

    Maps each 4-tag left context to its occurrence count and to the
    per-next-tag transition counts. Transitions into UNK are never
    counted, so each context's transitions sum exactly to its count and
    add-k smoothing normalizes exactly over the 18 in-vocabulary tags.
    """

    context_counts: dict[tuple[str, ...], int] = field(default_factory=dict)
    transition_counts: dict[tuple[str, ...], Counter[str]] = field(default_factory=dict)

    def add_sequence(self, tags: Iterable[str]) -> None:
        """Count the padded 5-grams of one POS sequence.

        Sequences shorter than two tags contribute nothing.
        """
        tags = tuple(tags)
        if len(tags) < 2:
            return
        padded = (SEP_TAG,) * CONTEXT_LEN + tags
        for i in range(CONTEXT_LEN, len(padded)):
            nxt = padded[i]
            if nxt == UNK_TAG:
                continue
            context = padded[i - CONTEXT_LEN:i]
            self.context_counts[context] = self.context_counts.get(context, 0) + 1
            self.transition_counts.setdefault(context, Counter())[nxt] += 1

    def merge(self, other: PosNgramTable) -> None:
        for context, n in other.context_counts.items():
            self.context_counts[context] = self.context_counts.get(context, 0) + n
        for context, transitions in other.transition_counts.items():
            own = self.transition_counts.setdefault(context, Counter())
            for nxt, n in transitions.items():
                own[nxt] += n

    def logprob(self, context: Iterable[str], next_tag: str,
                k: float = DEFAULT_SMOOTHING_K) -> float:
        """Add-k smoothed natural-log probability of `next_tag` after `context`."""
        context = tuple(context)
        context_count = self.context_counts.get(context, 0)
        transitions = self.transition_counts.get(context)
        transition_count = transitions.get(next_tag, 0) if transitions else 0
        return math.log((transition_count + k) / (context_count + k * TAG_VOCAB_SIZE))


@dataclass
class TokenEmbeddingTable:
    """Per content-token sums of unit-normalized embeddings.

    Storing normed sums instead of raw embedding sets keeps the table
    O(vocabulary) while preserving mean pairwise cosine computations:
    the mean-normed vector is sum/count.
    """

    sums: dict[str, np.ndarray] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)

    def add(self, token: str, embedding) -> None:
        vec = np.asarray(embedding, dtype=np.float64)
        vec = vec / np.linalg.norm(vec)
        if token in self.sums:
            self.sums[token] = self.sums[token] + vec
            self.counts[token] += 1
        else:
            self.sums[token] = vec
            self.counts[token] = 1

    def merge(self, other: TokenEmbeddingTable) -> None:
        for token, vec in other.sums.items():
            if token in self.sums:
                self.sums[token] = self.sums[token] + vec
                self.counts[token] += other.counts[token]
            else:
                self.sums[token] = vec.copy()
                self.counts[token] = other.counts[token]

    def mean(self, token: str) -> np.ndarray | None:
        if token not in self.sums:
            return None
        return self.sums[token] / self.counts[token]


@dataclass
class TrainProfile:
    content_unigrams: UnigramTable = field(default_factory=UnigramTable)
    subword_unigrams: UnigramTable = field(default_factory=UnigramTable)
    pos_ngrams: PosNgramTable = field(default_factory=PosNgramTable)
    token_embeddings: TokenEmbeddingTable = field(default_factory=TokenEmbeddingTable)
    example_embedding_sum: np.ndarray | None = None
    example_embedding_count: int = 0
    domains: Counter[str] = field(default_factory=Counter)
    example_count: int = 0
    dim: int = 0
    version: int = PROFILE_VERSION

    @property
    def domain(self) -> str:
        """Majority domain label (ties broken lexicographically)."""
        if not self.domains:
            return ""
        return min(self.domains, key=lambda d: (-self.domains[d], d))

    def content_unigram_logprob(self, token: str, floor: float = DEFAULT_OOV_FLOOR) -> float:
        return self.content_unigrams.logprob(token, floor)

    def subword_unigram_logprob(self, token: str, floor: float = DEFAULT_OOV_FLOOR) -> float:
        return self.subword_unigrams.logprob(token, floor)

    def pos_ngram_logprob(self, context: Iterable[str], next_tag: str,
                          k: float = DEFAULT_SMOOTHING_K) -> float:
        return self.pos_ngrams.logprob(context, next_tag, k)

    def token_mean_normed_embedding(self, token: str) -> np.ndarray | None:
        return self.token_embeddings.mean(token)

    def corpus_mean_normed_embedding(self) -> np.ndarray | None:
        if self.example_embedding_count == 0 or self.example_embedding_sum is None:
            return None
        return self.example_embedding_sum / self.example_embedding_count

    def add_example(self, example: AnnotatedExample) -> None:
        for token in example.tokens:
            if token.is_content:
                self.content_unigrams.add(token.surface)
                if token.embedding is not None:
                    self.token_embeddings.add(token.surface, token.embedding)
        if example.subword_tokens:
            for sub in example.subword_tokens:
                self.subword_unigrams.add(sub)
        self.pos_ngrams.add_sequence(t.pos_tag for t in example.tokens)
        if example.example_embedding is not None:
            vec = np.asarray(example.example_embedding, dtype=np.float64)
            vec = vec / np.linalg.norm(vec)
            if self.example_embedding_sum is None:
                self.example_embedding_sum = vec
            else:
                self.example_embedding_sum = self.example_embedding_sum + vec
            self.example_embedding_count += 1
        self.domains[example.domain] += 1
        self.example_count += 1

    def to_dict(self) -> dict:
        """Plain-data form used for persistence and equality checks."""
        contexts = {}
        for context, count in self.pos_ngrams.context_counts.items():
            key = " ".join(context)
            contexts[key] = {
                "count": count,
                "next": dict(self.pos_ngrams.transition_counts[context]),
            }
        return {
            "format": PROFILE_FORMAT,
            "version": self.version,
            "meta": {
                "domains": dict(self.domains),
                "examples": self.example_count,
                "dim": self.dim,
            },
            "content_unigrams": {"counts": dict(self.content_unigrams.counts),
                                 "total": self.content_unigrams.total},
            "subword_unigrams": {"counts": dict(self.subword_unigrams.counts),
                                 "total": self.subword_unigrams.total},
            "pos_ngrams": contexts,
            "token_embeddings": {
                token: {"count": self.token_embeddings.counts[token],
                        "sum": [float(v) for v in vec]}
                for token, vec in self.token_embeddings.sums.items()
            },
            "example_embedding": (
                None if self.example_embedding_sum is None else
                {"count": self.example_embedding_count,
                 "sum": [float(v) for v in self.example_embedding_sum]}
            ),
        }

    @classmethod
    def from_dict(cls, data: dict) -> TrainProfile:
        try:
            if data.get("format") != PROFILE_FORMAT:
                raise ProfileError(f"not a {PROFILE_FORMAT} file")
            version = data["version"]
            if version > PROFILE_VERSION:
                raise ProfileError(
                    f"unsupported profile version {version}; this build reads up to {PROFILE_VERSION}")
            profile = cls(version=version)
            meta = data["meta"]
            profile.domains = Counter(meta["domains"])
            profile.example_count = meta["examples"]
            profile.dim = meta["dim"]
            for name in ("content_unigrams", "subword_unigrams"):
                table = getattr(profile, name)
                table.counts = Counter(data[name]["counts"])
                table.total = data[name]["total"]
            for key, entry in data["pos_ngrams"].items():
                context = tuple(key.split(" "))
                profile.pos_ngrams.context_counts[context] = entry["count"]
                profile.pos_ngrams.transition_counts[context] = Counter(entry["next"])
            for token, entry in data["token_embeddings"].items():
                profile.token_embeddings.sums[token] = np.asarray(entry["sum"], dtype=np.float64)
                profile.token_embeddings.counts[token] = entry["count"]
            corpus = data["example_embedding"]
            if corpus is not None:
                profile.example_embedding_sum = np.asarray(corpus["sum"], dtype=np.float64)
                profile.example_embedding_count = corpus["count"]
            return profile
        except ProfileError:
            raise
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise ProfileError(f"malformed profile file: {exc}") from exc


def build_profile(corpus: Iterable[AnnotatedExample], dim: int = 0) -> TrainProfile:
    """Aggregate a training corpus into a TrainProfile.

    POS sequences are padded with four leading [SEP] symbols before
    5-gram extraction; examples with fewer than two tokens contribute no
    5-grams but still contribute unigrams and embeddings. An empty corpus
    is an error.
    """
    profile = TrainProfile(dim=dim)
    for example in corpus:
        profile.add_example(example)
    if profile.example_count == 0:
        raise DataError("cannot build a profile from an empty corpus")
    return profile


def merge_profiles(a: TrainProfile, b: TrainProfile) -> TrainProfile:
    """Pointwise sum of two profiles; associative and commutative."""
    if a.dim != b.dim:
        raise ProfileError(f"embedding dimension mismatch: {a.dim} vs {b.dim}")
    if a.version != b.version:
        raise ProfileError(f"format version mismatch: {a.version} vs {b.version}")
    merged = TrainProfile(dim=a.dim, version=a.version)
    for part in (a, b):
        merged.content_unigrams.merge(part.content_unigrams)
        merged.subword_unigrams.merge(part.subword_unigrams)
        merged.pos_ngrams.merge(part.pos_ngrams)
        merged.token_embeddings.merge(part.token_embeddings)
        if part.example_embedding_sum is not None:
            if merged.example_embedding_sum is None:
                merged.example_embedding_sum = part.example_embedding_sum.copy()
            else:
                merged.example_embedding_sum = merged.example_embedding_sum + part.example_embedding_sum
            merged.example_embedding_count += part.example_embedding_count
        merged.domains.update(part.domains)
        merged.example_count += part.example_count
    return merged


def save_profile(profile: TrainProfile, sink: str | Path | IO[str]) -> None:
    """Write a profile as canonical JSON (sorted keys, exact round-trip)."""
    text = json.dumps(profile.to_dict(), sort_keys=True, separators=(",", ":"))
    if isinstance(sink, (str, Path)):
        tmp = f"{sink}.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        os.replace(tmp, sink)
    else:
        sink.write(text + "\n")


def load_profile(source: str | Path | IO[str]) -> TrainProfile:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileError(f"truncated or corrupt profile file: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ProfileError("truncated or corrupt profile file: not an object")
    return TrainProfile.from_dict(data)
