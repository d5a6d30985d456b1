"""Task dataset builders, splits and dataset files."""

from collections import Counter
from typing import Dict, Sequence

from ..core.models import TaskItem
from .builders import build_relation_triples, build_taxonomy_pairs, build_term_typing
from .dataset_io import read_dataset_jsonl, task_of, write_dataset_jsonl
from .splits import split_dataset


def dataset_stats(items: Sequence[TaskItem]) -> Dict[str, int]:
    """Item counts per partition, plus positives/negatives for boolean tasks."""
    stats: Counter = Counter()
    for item in items:
        stats[item.partition.value if item.partition else "unsplit"] += 1
        label = getattr(item, "label", None)
        if label is not None:
            stats["positive" if label else "negative"] += 1
    stats["total"] = len(items)
    return dict(sorted(stats.items()))


__all__ = [
    "build_relation_triples",
    "build_taxonomy_pairs",
    "build_term_typing",
    "dataset_stats",
    "read_dataset_jsonl",
    "split_dataset",
    "task_of",
    "write_dataset_jsonl",
]
