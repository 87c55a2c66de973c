"""Annotator-specific failure type.

Input and usage failures reuse the toolkit's error classes so the
command line maps every failure onto the same exit-code contract.
"""

from __future__ import annotations

from driftscope import DataError


class ModelLoadError(DataError):
    """A configured tagger or embedding model could not be loaded."""
