"""Utterance normalization applied before any matching."""

from __future__ import annotations

import re

_PUNCT = re.compile(r"[^\w'\s]", re.UNICODE)
_WS = re.compile(r"\s+")


def normalize(text: str) -> str:
    """Lowercase, drop punctuation except apostrophes, collapse whitespace."""
    text = _PUNCT.sub(" ", text.lower())
    return _WS.sub(" ", text).strip()
