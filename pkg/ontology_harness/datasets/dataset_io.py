"""Dataset JSONL files, one per task and partition."""

import logging
from typing import Any, Dict, Iterable, List

from ..core.errors import ParseError
from ..core.models import (Partition, Provenance, RelationTripleItem, SourceId, Task, TaskItem,
                           TermTypingItem, TypePairItem)
from ..utils.jsonl import PathLike, read_jsonl, write_jsonl

logger = logging.getLogger(__name__)


def task_of(item: TaskItem) -> Task:
    if isinstance(item, TermTypingItem):
        return Task.TERM_TYPING
    if isinstance(item, TypePairItem):
        return Task.TAXONOMY_DISCOVERY
    return Task.RELATION_EXTRACTION


def item_to_dict(item: TaskItem) -> Dict[str, Any]:
    """Serialize an item with the fixed per-task field order."""
    partition = item.partition.value if item.partition else None
    if isinstance(item, TermTypingItem):
        row: Dict[str, Any] = {"item_id": item.item_id, "term": item.surface_form}
        if item.context_sentence is not None:
            row["sentence"] = item.context_sentence
        row["gold_types"] = sorted(item.gold_types)
        row["partition"] = partition
        return row
    if isinstance(item, TypePairItem):
        row = {
            "item_id": item.item_id,
            "a": item.type_a,
            "b": item.type_b,
            "label": item.label,
            "provenance": item.provenance.value,
            "partition": partition,
        }
        if item.a_text is not None:
            row["a_text"] = item.a_text
        if item.b_text is not None:
            row["b_text"] = item.b_text
        return row
    return {
        "item_id": item.item_id,
        "h": item.head,
        "r": item.relation,
        "t": item.tail,
        "label": item.label,
        "partition": partition,
    }


def item_from_dict(row: Dict[str, Any], task: Task) -> TaskItem:
    partition = Partition(row["partition"]) if row.get("partition") else None
    if task == Task.TERM_TYPING:
        return TermTypingItem(
            item_id=row["item_id"],
            surface_form=row["term"],
            gold_types=frozenset(row["gold_types"]),
            # term ids start with their source id
            source_id=SourceId(row["item_id"].split(":", 1)[0]),
            partition=partition,
            context_sentence=row.get("sentence"),
        )
    if task == Task.TAXONOMY_DISCOVERY:
        return TypePairItem(
            item_id=row["item_id"],
            type_a=row["a"],
            type_b=row["b"],
            label=bool(row["label"]),
            provenance=Provenance(row["provenance"]),
            partition=partition,
            a_text=row.get("a_text"),
            b_text=row.get("b_text"),
        )
    return RelationTripleItem(
        item_id=row["item_id"],
        head=row["h"],
        relation=row["r"],
        tail=row["t"],
        label=bool(row["label"]),
        partition=partition,
    )


def write_dataset_jsonl(items: Iterable[TaskItem], path: PathLike) -> int:
    count = write_jsonl((item_to_dict(item) for item in items), path)
    logger.info(f"Wrote {count} items to {path}")
    return count


def read_dataset_jsonl(path: PathLike, task: Task) -> List[TaskItem]:
    """Load items written by ``write_dataset_jsonl``.

    Raises:
        SourceUnavailableError: If the file is missing.
        ParseError: On a record that does not fit the task's shape.
    """
    task = Task(task)
    items = []
    for number, row in enumerate(read_jsonl(path), 1):
        try:
            items.append(item_from_dict(row, task))
        except (KeyError, ValueError) as e:
            raise ParseError(f"record {number} is not a Task {task.value} item ({e})", str(path))
    return items
