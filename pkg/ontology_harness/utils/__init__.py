"""Utility modules for the ontology harness."""

from .formatters import format_count, format_date, format_elapsed, format_score
from .hashing import stable_hash, hash_files
from .jsonl import read_jsonl, write_jsonl

__all__ = ["format_count", "format_date", "format_elapsed", "format_score",
           "stable_hash", "hash_files", "read_jsonl", "write_jsonl"]
