"""Corpus annotator producing driftscope/v1 annotation files.

Turns raw text documents (optionally with correctness labels) into the
annotated JSON-lines format the drift toolkit consumes: tokens, UPOS
tags, content-word flags, subword pieces, and token/example embeddings,
with the pinned pipeline identities recorded in the output header.
"""

from .embedding import (
    EmbeddingResult,
    HFEmbedder,
    HashedEmbedder,
    NoneEmbedder,
    PIECES_ID,
    PIECES_VERSION,
    load_embedder,
    parse_layers,
    subword_pieces,
)
from .errors import ModelLoadError
from .pipeline import (
    AnnotationJob,
    AnnotationResult,
    annotate,
    read_documents,
    verify_output,
)
from .tagging import (
    OPEN_CLASS_TAGS,
    RuleTagger,
    STOPWORDS,
    SpacyTagger,
    load_tagger,
    tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotationJob",
    "AnnotationResult",
    "EmbeddingResult",
    "HFEmbedder",
    "HashedEmbedder",
    "ModelLoadError",
    "NoneEmbedder",
    "OPEN_CLASS_TAGS",
    "PIECES_ID",
    "PIECES_VERSION",
    "RuleTagger",
    "STOPWORDS",
    "SpacyTagger",
    "annotate",
    "load_embedder",
    "load_tagger",
    "parse_layers",
    "read_documents",
    "subword_pieces",
    "tokenize",
    "verify_output",
]
