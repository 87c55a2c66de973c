"""Subword tokenization and token/example embedding backends.

Three interchangeable backends cover the embedding configuration space:

* "none": no vectors; corpora carry dim 0 and only the subword channel.
* "hashed:<dim>": deterministic pseudo-embeddings derived by hashing
  (subword piece, layer) pairs. No model files, identical across runs
  and machines; suitable for pipelines that only need the lexical and
  structural channels plus a reproducible vector channel.
* "hf:<model-or-path>": contextual embeddings from a locally available
  transformers checkpoint, averaging each token's subword pieces over
  the configured hidden layers.

Every backend returns, per document, the subword piece list, one vector
per token (when dim > 0), and the example vector (the mean of the token
vectors).
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

import numpy as np

from driftscope import UsageError

from .errors import ModelLoadError

#: Pinned fallback subword scheme: fixed-width chunks of the lowercased surface.
PIECES_ID = "builtin:chunk4"
PIECES_VERSION = "1.0"
_CHUNK = 4

_LAST_N_RE = re.compile(r"last-(\d+)")


def parse_layers(spec: str) -> tuple[int, ...]:
    """Parse a layers-to-average spec: 'last-N' or comma-separated indices."""
    spec = spec.strip()
    match = _LAST_N_RE.fullmatch(spec)
    if match:
        n = int(match.group(1))
        if n < 1:
            raise UsageError(f"layer spec '{spec}' selects no layers")
        return tuple(range(-n, 0))
    try:
        layers = tuple(int(part) for part in spec.split(",") if part.strip())
    except ValueError:
        raise UsageError(f"layer spec '{spec}' is neither 'last-N' nor "
                         f"a comma-separated index list") from None
    if not layers:
        raise UsageError(f"layer spec '{spec}' selects no layers")
    return layers


def subword_pieces(surface: str) -> list[str]:
    """Deterministic fallback subword split: 4-character chunks."""
    lowered = surface.lower()
    return [lowered[i:i + _CHUNK] for i in range(0, len(lowered), _CHUNK)]


@dataclass
class EmbeddingResult:
    """Per-document embedding output, aligned with the input surfaces."""

    subwords: list[str]
    token_embeddings: list[list[float] | None]
    example_embedding: list[float] | None


class NoneEmbedder:
    """Dim-0 backend: subword pieces only, no vector channel."""

    id = "none"
    version = "1.0"
    dim = 0

    def embed(self, surfaces: list[str]) -> EmbeddingResult:
        subwords: list[str] = []
        for surface in surfaces:
            subwords.extend(subword_pieces(surface))
        return EmbeddingResult(subwords, [None] * len(surfaces), None)


class HashedEmbedder:
    """Hash-seeded unit vectors per (subword piece, layer), averaged.

    Each piece-layer pair seeds a generator that emits one unit vector;
    a token's embedding is the mean over its pieces and the configured
    layers. The construction involves no randomness at run time, so
    outputs are identical across runs and platforms.
    """

    version = "1.0"

    def __init__(self, dim: int, layers: tuple[int, ...]):
        if dim < 1:
            raise UsageError(f"hashed embedding dimension must be >= 1; got {dim}")
        self.dim = dim
        self.layers = layers
        self.id = f"hashed:{dim}"
        self._cache: dict[tuple[str, int], np.ndarray] = {}

    def _piece_vector(self, piece: str, layer: int) -> np.ndarray:
        key = (piece, layer)
        cached = self._cache.get(key)
        if cached is None:
            digest = hashlib.blake2b(f"{layer}\x1f{piece}".encode("utf-8"),
                                     digest_size=8).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "big"))
            vec = rng.standard_normal(self.dim)
            cached = self._cache[key] = vec / np.linalg.norm(vec)
        return cached

    def embed(self, surfaces: list[str]) -> EmbeddingResult:
        subwords: list[str] = []
        token_vectors: list[list[float] | None] = []
        for surface in surfaces:
            pieces = subword_pieces(surface)
            subwords.extend(pieces)
            total = np.zeros(self.dim)
            for piece in pieces:
                for layer in self.layers:
                    total += self._piece_vector(piece, layer)
            vec = total / (len(pieces) * len(self.layers))
            if not np.linalg.norm(vec) > 0.0:
                # distinct unit vectors cancelling exactly is practically
                # unreachable, but the schema forbids zero vectors
                vec = self._piece_vector(surface.lower(), 0)
            token_vectors.append([float(x) for x in vec])
        example = np.mean(np.asarray(token_vectors, dtype=np.float64), axis=0)
        return EmbeddingResult(subwords, token_vectors,
                               [float(x) for x in example])


class HFEmbedder:
    """Contextual embeddings from a local transformers checkpoint.

    Documents are encoded pre-tokenized so the model's subword pieces
    align back onto the tagger's tokens; each token vector is the mean
    of its pieces over the configured hidden layers.
    """

    def __init__(self, model_id: str, layers: tuple[int, ...]):
        try:
            import torch
            import transformers
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise ModelLoadError(f"embedding model 'hf:{model_id}' needs the "
                                 f"transformers package: {exc}") from exc
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(model_id, use_fast=True)
            self._model = AutoModel.from_pretrained(model_id)
        except Exception as exc:  # loader failures share no usable base class
            raise ModelLoadError(f"embedding model 'hf:{model_id}' could not "
                                 f"be loaded: {exc}") from exc
        self._model.eval()
        self._torch = torch
        self.dim = int(self._model.config.hidden_size)
        self.layers = layers
        self.id = f"hf:{model_id}"
        self.version = f"transformers-{transformers.__version__}"

    def embed(self, surfaces: list[str]) -> EmbeddingResult:
        encoding = self._tokenizer(surfaces, is_split_into_words=True,
                                   return_tensors="pt", truncation=True)
        with self._torch.no_grad():
            output = self._model(**encoding, output_hidden_states=True)
        # (layers, positions, dim) over the selected hidden layers
        stack = self._torch.stack([output.hidden_states[i]
                                   for i in self.layers])[:, 0]
        word_ids = encoding.word_ids()
        pieces = self._tokenizer.convert_ids_to_tokens(encoding["input_ids"][0])
        subwords = [piece for piece, word in zip(pieces, word_ids)
                    if word is not None]
        positions: dict[int, list[int]] = {}
        for position, word in enumerate(word_ids):
            if word is not None:
                positions.setdefault(word, []).append(position)
        token_vectors: list[list[float] | None] = []
        for index in range(len(surfaces)):
            spots = positions.get(index)
            if not spots:  # truncated away
                token_vectors.append(None)
                continue
            vec = stack[:, spots, :].mean(dim=(0, 1))
            token_vectors.append([float(x) for x in vec])
        present = [v for v in token_vectors if v is not None]
        example = None
        if present:
            example = [float(x) for x in
                       np.mean(np.asarray(present, dtype=np.float64), axis=0)]
        return EmbeddingResult(subwords, token_vectors, example)


def load_embedder(embedder_id: str, layers: str = "last-2"):
    """Instantiate the embedding backend named by `embedder_id`."""
    if embedder_id == "none":
        return NoneEmbedder()
    if embedder_id.startswith("hashed:"):
        raw = embedder_id.removeprefix("hashed:")
        try:
            dim = int(raw)
        except ValueError:
            raise UsageError(f"hashed embedder needs an integer dimension; "
                             f"got 'hashed:{raw}'") from None
        return HashedEmbedder(dim, parse_layers(layers))
    if embedder_id.startswith("hf:"):
        return HFEmbedder(embedder_id.removeprefix("hf:"), parse_layers(layers))
    raise UsageError(f"unknown embedder '{embedder_id}' (expected 'none', "
                     f"'hashed:<dim>', or 'hf:<model-or-path>')")
