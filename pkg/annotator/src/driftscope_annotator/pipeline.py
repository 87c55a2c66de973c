"""End-to-end annotation: raw documents in, validated corpus out.

One input document becomes one annotated example: the tagger pipeline
tokenizes and tags it, the content flag marks open-class non-stopword
tokens, and the embedding backend supplies the subword channel plus
token and example vectors. The output header records the pinned tagger,
stopword-list, subword, and embedder identities so a corpus declares
exactly what produced it.

Documents annotate independently (the batch could be processed in
parallel); the output file always lists them in input order. Documents
that tokenize to nothing are skipped and reported, never emitted.
"""

from __future__ import annotations

import contextlib
import csv
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterator

from driftscope import (
    AnnotatedExample,
    AnnotatedToken,
    DataError,
    SCHEMA_NAME,
    UsageError,
    ValidationSummary,
    serialize_example,
    validate_corpus,
)

from .embedding import PIECES_ID, PIECES_VERSION, load_embedder
from .tagging import OPEN_CLASS_TAGS, load_tagger

_TRUE_WORDS = frozenset({"true", "1", "yes", "y"})
_FALSE_WORDS = frozenset({"false", "0", "no", "n"})


@dataclass
class AnnotationJob:
    """One annotation run: input documents, pipeline ids, output path."""

    input_path: str | Path
    output_path: str | Path
    tagger_id: str = "builtin:rule-en"
    embedder_id: str = "hashed:16"
    layers: str = "last-2"
    input_format: str | None = None  # "text" | "delimited"; None = by suffix
    default_domain: str = "default"


@dataclass
class AnnotationResult:
    """What one run produced: counts, skipped document ids, header meta."""

    written: int
    skipped: list[str]
    dim: int
    meta: dict[str, str]
    output: Path

    def to_dict(self) -> dict:
        return {"examples": self.written, "skipped": self.skipped,
                "dim": self.dim, "meta": self.meta, "output": str(self.output)}


def _parse_correct(raw: str, line: int) -> bool | None:
    value = raw.strip().lower()
    if not value:
        return None
    if value in _TRUE_WORDS:
        return True
    if value in _FALSE_WORDS:
        return False
    raise DataError(f"line {line}: correct column must be boolean-like, "
                    f"got '{raw}'")


def _read_text(path: Path, default_domain: str) -> Iterator[tuple[str, str, bool | None, str]]:
    with open(path, "r", encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            yield f"doc-{i:04d}", default_domain, None, line.rstrip("\n")


def _read_delimited(path: Path, default_domain: str) -> Iterator[tuple[str, str, bool | None, str]]:
    delimiter = "\t" if path.suffix.lower() == ".tsv" else ","
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        if reader.fieldnames is None or "text" not in reader.fieldnames:
            raise DataError(f"'{path}' needs a header row with a 'text' column")
        for i, row in enumerate(reader, start=2):
            text = row.get("text") or ""
            doc_id = (row.get("id") or "").strip() or f"doc-{i - 1:04d}"
            domain = (row.get("domain") or "").strip() or default_domain
            correct = _parse_correct(row.get("correct") or "", i)
            yield doc_id, domain, correct, text


def read_documents(path: str | Path, input_format: str | None = None,
                   default_domain: str = "default") -> Iterator[tuple[str, str, bool | None, str]]:
    """Yield (id, domain, correct, text) per document, in file order."""
    path = Path(path)
    fmt = input_format
    if fmt is None:
        fmt = "delimited" if path.suffix.lower() in {".csv", ".tsv"} else "text"
    if fmt == "text":
        return _read_text(path, default_domain)
    if fmt == "delimited":
        return _read_delimited(path, default_domain)
    raise UsageError(f"unknown input format '{fmt}' (expected 'text' or 'delimited')")


@contextlib.contextmanager
def _atomic_writer(path: Path):
    tmp = path.with_name(path.name + ".tmp")
    fh = open(tmp, "w", encoding="utf-8")
    try:
        yield fh
        fh.close()
        os.replace(tmp, path)
    except BaseException:
        fh.close()
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _header_line(dim: int, meta: dict[str, str]) -> str:
    return json.dumps({"schema": SCHEMA_NAME, "dim": dim, "meta": meta},
                      sort_keys=True, separators=(",", ":"))


def annotate(job: AnnotationJob) -> AnnotationResult:
    """Run one annotation job; returns counts and the recorded meta."""
    tagger = load_tagger(job.tagger_id)
    embedder = load_embedder(job.embedder_id, job.layers)
    meta = {
        "tagger": tagger.id,
        "tagger_version": tagger.version,
        "stopwords": tagger.stopwords_id,
        "stopwords_version": tagger.stopwords_version,
        "embedder": embedder.id,
        "embedder_version": embedder.version,
        "subwords": getattr(embedder, "pieces_id", PIECES_ID),
        "subwords_version": getattr(embedder, "pieces_version", PIECES_VERSION),
        "layers": job.layers,
    }
    output = Path(job.output_path)
    written = 0
    skipped: list[str] = []
    seen_ids: set[str] = set()
    with _atomic_writer(output) as sink:
        sink.write(_header_line(embedder.dim, meta) + "\n")
        for doc_id, domain, correct, text in read_documents(
                job.input_path, job.input_format, job.default_domain):
            if doc_id in seen_ids:
                raise DataError(f"duplicate document id '{doc_id}' in "
                                f"'{job.input_path}'")
            seen_ids.add(doc_id)
            pairs = tagger.annotate_text(text)
            if not pairs:
                skipped.append(doc_id)
                continue
            embedded = embedder.embed([surface for surface, _ in pairs])
            tokens = tuple(
                AnnotatedToken(
                    surface=surface,
                    pos_tag=tag,
                    is_content=(tag in OPEN_CLASS_TAGS
                                and surface.lower() not in tagger.stopwords),
                    embedding=None if vec is None else tuple(vec))
                for (surface, tag), vec in zip(pairs, embedded.token_embeddings))
            example = AnnotatedExample(
                id=doc_id, domain=domain, tokens=tokens,
                subword_tokens=tuple(embedded.subwords) or None,
                example_embedding=(None if embedded.example_embedding is None
                                   else tuple(embedded.example_embedding)),
                correct=correct)
            sink.write(serialize_example(example) + "\n")
            written += 1
    return AnnotationResult(written=written, skipped=skipped,
                            dim=embedder.dim, meta=meta, output=output)


def verify_output(path: str | Path) -> ValidationSummary:
    """Validate an annotated corpus with the toolkit's own validator."""
    return validate_corpus(path)
