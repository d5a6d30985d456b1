"""Normalization of raw model text before answer mapping."""

import re
import unicodedata

EDGE_PUNCTUATION = re.compile(r"^[\W_]+|[\W_]+$")
WHITESPACE = re.compile(r"\s+")
LEADING_ARTICLE = re.compile(r"^(?:a|an|the)\s+")


def normalize(text: str) -> str:
    """NFC, lowercase, trim punctuation and whitespace, drop a leading article, collapse spaces.

    The steps repeat until the text stops changing, so the function is
    idempotent: ``" A Noun."`` -> ``"noun"``, ``"the Parent  Class"`` -> ``"parent class"``.
    """
    current = text or ""
    while True:
        updated = unicodedata.normalize("NFC", current).lower()
        updated = EDGE_PUNCTUATION.sub("", updated)
        updated = WHITESPACE.sub(" ", updated).strip()
        updated = LEADING_ARTICLE.sub("", updated)
        if updated == current:
            return updated
        current = updated
