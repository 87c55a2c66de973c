"""Annotated-corpus data model and streaming JSON-lines ingestion.

A corpus file carries one header line declaring the schema name and the
embedding dimension, followed by one JSON object per example:

    {"schema": "driftscope/v1", "dim": 2}
    {"id": "a", "domain": "books", "tokens": [{"t": "dog", "pos": "NOUN",
     "content": true, "emb": [1.0, 0.0]}], "subwords": ["dog"],
     "emb": [1.0, 0.0], "correct": true}

Annotation (tokenization, POS tags, content flags, embeddings) is input
data produced upstream; this module only validates and streams it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator

from .errors import ParseError, ValidationError

SCHEMA_NAME = "driftscope/v1"

#: The 17 Universal POS tags.
UPOS_TAGS = frozenset({
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
})

#: Placeholder for tokens the upstream tagger could not tag.
UNK_TAG = "UNK"

VALID_TAGS = frozenset(UPOS_TAGS | {UNK_TAG})


@dataclass(frozen=True)
class AnnotatedToken:
    surface: str
    pos_tag: str
    is_content: bool
    embedding: tuple[float, ...] | None = None


@dataclass(frozen=True)
class AnnotatedExample:
    id: str
    domain: str
    tokens: tuple[AnnotatedToken, ...]
    subword_tokens: tuple[str, ...] | None = None
    example_embedding: tuple[float, ...] | None = None
    correct: bool | None = None

    @property
    def content_surfaces(self) -> list[str]:
        """Surfaces of content tokens, in order, with repeats."""
        return [t.surface for t in self.tokens if t.is_content]


@dataclass
class CorpusHandle:
    """Identity and declared properties of one corpus file.

    `count` is only meaningful after the accompanying stream has been
    fully consumed.
    """

    source: str
    dim: int
    count: int = 0


@dataclass
class ValidationSummary:
    source: str
    dim: int = 0
    examples: int = 0
    tokens: int = 0
    content_tokens: int = 0
    examples_with_embedding: int = 0
    tokens_with_embedding: int = 0
    examples_with_label: int = 0
    issues: list[str] = field(default_factory=list)

    @property
    def example_embedding_coverage(self) -> float:
        return self.examples_with_embedding / self.examples if self.examples else 0.0

    @property
    def token_embedding_coverage(self) -> float:
        return self.tokens_with_embedding / self.tokens if self.tokens else 0.0

    @property
    def label_coverage(self) -> float:
        return self.examples_with_label / self.examples if self.examples else 0.0

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "dim": self.dim,
            "examples": self.examples,
            "tokens": self.tokens,
            "content_tokens": self.content_tokens,
            "example_embedding_coverage": self.example_embedding_coverage,
            "token_embedding_coverage": self.token_embedding_coverage,
            "label_coverage": self.label_coverage,
            "issues": list(self.issues),
        }


def _expect(condition: bool, message: str, field_name: str, line: int | None):
    if not condition:
        raise ValidationError(message, field=field_name, line=line)


def _parse_embedding(value, field_name: str, dim: int | None, line: int | None) -> tuple[float, ...]:
    _expect(isinstance(value, list) and value, "must be a nonempty list of numbers", field_name, line)
    out = []
    for v in value:
        _expect(isinstance(v, (int, float)) and not isinstance(v, bool),
                "must contain only numbers", field_name, line)
        out.append(float(v))
    if dim is not None:
        _expect(dim > 0, "corpus declares dim 0, embeddings must be absent", field_name, line)
        _expect(len(out) == dim,
                f"has dimension {len(out)}, corpus declares {dim}", field_name, line)
    norm_sq = math.fsum(v * v for v in out)
    _expect(math.isfinite(norm_sq) and norm_sq > 0.0,
            "must have finite, positive Euclidean norm", field_name, line)
    return tuple(out)


def parse_example(line: str, dim: int | None = None, line_number: int | None = None) -> AnnotatedExample:
    """Parse and validate one annotation record.

    `dim` is the corpus-declared embedding dimension (None skips the
    dimension check, 0 forbids embeddings). Unknown fields are ignored.
    Raises ParseError on malformed JSON, ValidationError on schema
    violations; both carry `line_number` when given.
    """
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=line_number) from exc
    if not isinstance(obj, dict):
        raise ParseError("record must be a JSON object", line=line_number)

    example_id = obj.get("id")
    _expect(isinstance(example_id, str) and example_id != "", "missing or empty", "id", line_number)
    domain = obj.get("domain")
    _expect(isinstance(domain, str), "missing or not a string", "domain", line_number)

    raw_tokens = obj.get("tokens")
    _expect(isinstance(raw_tokens, list) and raw_tokens, "missing or empty", "tokens", line_number)
    tokens = []
    for i, tok in enumerate(raw_tokens):
        where = f"tokens[{i}]"
        _expect(isinstance(tok, dict), "must be an object", where, line_number)
        surface = tok.get("t")
        _expect(isinstance(surface, str), "missing or not a string", f"{where}.t", line_number)
        pos = tok.get("pos")
        _expect(isinstance(pos, str), "missing or not a string", f"{where}.pos", line_number)
        _expect(pos in VALID_TAGS, f"'{pos}' is not a UPOS tag or {UNK_TAG}", f"{where}.pos", line_number)
        content = tok.get("content")
        _expect(isinstance(content, bool), "missing or not a boolean", f"{where}.content", line_number)
        emb = tok.get("emb")
        embedding = None if emb is None else _parse_embedding(emb, f"{where}.emb", dim, line_number)
        tokens.append(AnnotatedToken(surface, pos, content, embedding))

    subwords = obj.get("subwords")
    if subwords is not None:
        _expect(isinstance(subwords, list), "must be a list of strings", "subwords", line_number)
        for s in subwords:
            _expect(isinstance(s, str), "must be a list of strings", "subwords", line_number)
        subwords = tuple(subwords)

    emb = obj.get("emb")
    example_embedding = None if emb is None else _parse_embedding(emb, "emb", dim, line_number)

    correct = obj.get("correct")
    if correct is not None:
        _expect(isinstance(correct, bool), "must be a boolean", "correct", line_number)

    return AnnotatedExample(
        id=example_id,
        domain=domain,
        tokens=tuple(tokens),
        subword_tokens=subwords,
        example_embedding=example_embedding,
        correct=correct,
    )


def serialize_example(example: AnnotatedExample) -> str:
    """Render one example as a single JSON line in the corpus format."""
    tokens = []
    for t in example.tokens:
        tok = {"t": t.surface, "pos": t.pos_tag, "content": t.is_content}
        if t.embedding is not None:
            tok["emb"] = list(t.embedding)
        tokens.append(tok)
    obj: dict = {"id": example.id, "domain": example.domain, "tokens": tokens}
    if example.subword_tokens is not None:
        obj["subwords"] = list(example.subword_tokens)
    if example.example_embedding is not None:
        obj["emb"] = list(example.example_embedding)
    if example.correct is not None:
        obj["correct"] = example.correct
    return json.dumps(obj, ensure_ascii=True, separators=(",", ":"))


def write_corpus(examples: Iterable[AnnotatedExample], sink: IO[str] | str | Path, dim: int = 0) -> int:
    """Write a header plus one line per example; returns the example count."""
    close = False
    if isinstance(sink, (str, Path)):
        sink = open(sink, "w", encoding="utf-8")
        close = True
    try:
        sink.write(json.dumps({"schema": SCHEMA_NAME, "dim": dim}, separators=(",", ":")) + "\n")
        n = 0
        for ex in examples:
            sink.write(serialize_example(ex) + "\n")
            n += 1
        return n
    finally:
        if close:
            sink.close()


def parse_header(line: str) -> int:
    """Parse the corpus header line; returns the declared dimension."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in header: {exc.msg}", line=1) from exc
    if not isinstance(obj, dict) or obj.get("schema") != SCHEMA_NAME:
        raise ValidationError(f"first line must declare schema '{SCHEMA_NAME}'",
                              field="schema", line=1)
    dim = obj.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 0:
        raise ValidationError("must be a nonnegative integer", field="dim", line=1)
    return dim


def _open_lines(source: str | Path | IO[str]):
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8"), True, str(source)
    return source, False, getattr(source, "name", "<stream>")


def load_corpus(source: str | Path | IO[str]) -> tuple[CorpusHandle, Iterator[AnnotatedExample]]:
    """Open a corpus for streaming.

    Returns a handle (with the declared embedding dimension) and a
    single-pass generator that yields examples in file order, raising on
    the first invalid record. An empty file yields an empty stream and
    dim 0. The handle's `count` is updated as the stream is consumed.
    """
    fh, close, name = _open_lines(source)
    first = fh.readline()
    if first.strip() == "":
        if close:
            fh.close()
        handle = CorpusHandle(source=name, dim=0)

        def empty() -> Iterator[AnnotatedExample]:
            return iter(())

        return handle, empty()

    dim = parse_header(first)
    handle = CorpusHandle(source=name, dim=dim)

    def generate() -> Iterator[AnnotatedExample]:
        seen_ids: set[str] = set()
        try:
            for line_number, line in enumerate(fh, start=2):
                if line.strip() == "":
                    continue
                example = parse_example(line, dim=dim, line_number=line_number)
                if example.id in seen_ids:
                    raise ValidationError(f"duplicate id '{example.id}'",
                                          field="id", line=line_number)
                seen_ids.add(example.id)
                handle.count += 1
                yield example
        finally:
            if close:
                fh.close()

    return handle, generate()


def validate_corpus(source: str | Path | IO[str]) -> ValidationSummary:
    """Scan a corpus and report counts and coverage.

    Runs in report mode: invalid records are collected as located issues
    rather than aborting the scan, and valid records still contribute to
    the counts.
    """
    fh, close, name = _open_lines(source)
    summary = ValidationSummary(source=name)
    try:
        first = fh.readline()
        if first.strip() == "":
            return summary
        try:
            summary.dim = parse_header(first)
        except (ParseError, ValidationError) as exc:
            summary.issues.append(str(exc))
            return summary
        seen_ids: set[str] = set()
        for line_number, line in enumerate(fh, start=2):
            if line.strip() == "":
                continue
            try:
                example = parse_example(line, dim=summary.dim, line_number=line_number)
            except (ParseError, ValidationError) as exc:
                summary.issues.append(str(exc))
                continue
            if example.id in seen_ids:
                summary.issues.append(f"line {line_number}: duplicate id '{example.id}'")
                continue
            seen_ids.add(example.id)
            summary.examples += 1
            summary.tokens += len(example.tokens)
            summary.content_tokens += sum(1 for t in example.tokens if t.is_content)
            summary.tokens_with_embedding += sum(1 for t in example.tokens if t.embedding is not None)
            if example.example_embedding is not None:
                summary.examples_with_embedding += 1
            if example.correct is not None:
                summary.examples_with_label += 1
    finally:
        if close:
            fh.close()
    return summary
