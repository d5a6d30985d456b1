"""Few-shot instruction sample export for finetuning."""

import logging
import random
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

from .. import __version__
from ..backends.stubs import gold_answer
from ..prompts import catalog_hash, render, template_catalog
from ..prompts.catalog import CATALOG_SOURCES
from ..utils.jsonl import dumps_line
from .errors import CapacityError
from .models import (ModelFamily, Partition, RelationTripleItem, SourceId, Task, TaskItem, TermTypingItem,
                     TypePairItem)

logger = logging.getLogger(__name__)

SampleKey = Tuple[Task, SourceId]


def training_items(items: Iterable[TaskItem]) -> List[TaskItem]:
    """The train partition, or every item when the dataset is unsplit."""
    items = sorted(items, key=lambda item: item.item_id)
    if any(item.partition is not None for item in items):
        items = [item for item in items if item.partition == Partition.TRAIN]
    return items


def select_shots(items: Sequence[TaskItem], shots: int, seed: int, key: SampleKey) -> List[TaskItem]:
    """Draw ``shots`` items without replacement, seeded per (task, source).

    Raises:
        CapacityError: If fewer than ``shots`` items are available.
    """
    task, source = key
    if shots > len(items):
        raise CapacityError(f"Requested {shots} Task {task.value} shots from {source.value}", len(items))
    rng = random.Random(f"{seed}:{task.value}:{source.value}")
    return sorted(rng.sample(list(items), shots), key=lambda item: item.item_id)


def item_types(item: TaskItem) -> Set[str]:
    if isinstance(item, TermTypingItem):
        return set(item.gold_types)
    if isinstance(item, TypePairItem):
        return {item.type_a, item.type_b}
    if isinstance(item, RelationTripleItem):
        return {item.head, item.tail}
    return set()


def export_finetune_samples(samples: Mapping[SampleKey, Sequence[TaskItem]],
                            path: Union[str, Path],
                            shots_per_source: int = 8,
                            seed: int = 0,
                            model_family: Union[ModelFamily, str] = ModelFamily.SEQ2SEQ,
                            restrict_types: bool = False,
                            mask_token: str = "[MASK]") -> int:
    """Write instruction/target pairs drawn from training partitions.

    ``samples`` maps (task, source) to that dataset's items; only the train
    partition is sampled. Task A datasets are sampled first. Each shot is
    rendered with the next template of its catalog in turn, and its target is
    the gold answer. With ``restrict_types``, Task B/C items are limited to
    types that occur among the selected Task A shots.

    The file starts with a header line describing the export, so an export
    of zero shots is a header-only file.

    Returns:
        Number of sample records written.

    Raises:
        CapacityError: If a dataset's train partition is smaller than ``shots_per_source``.
        CatalogMissingError: If a task/source has no catalog for ``model_family``.
    """
    if shots_per_source < 0:
        raise ValueError(f"shots_per_source must not be negative, got {shots_per_source}")
    model_family = ModelFamily(model_family)
    keys = sorted(samples, key=lambda key: (key[0] != Task.TERM_TYPING, key[0].value, key[1].value))

    records: List[Dict[str, str]] = []
    shot_types: Set[str] = set()
    for key in keys:
        task, source = key
        pool = training_items(samples[key])
        if task != Task.TERM_TYPING and restrict_types:
            pool = [item for item in pool if item_types(item) <= shot_types]
            logger.info(f"{len(pool)} Task {task.value} {source.value} items use Task A shot types")
        shots = select_shots(pool, shots_per_source, seed, key)
        if task == Task.TERM_TYPING:
            for item in shots:
                shot_types |= item_types(item)
        if not shots:
            continue

        catalog = template_catalog(task, source, model_family)
        for index, item in enumerate(shots):
            template = catalog[index % len(catalog)]
            prompt = render(template, item, mask_token)
            records.append({
                "source": source.value,
                "task": task.value,
                "template_id": template.template_id,
                "instruction": prompt.text,
                "target": gold_answer(item),
            })

    header = {
        "manifest": {
            "artifact_version": __version__,
            "catalog_hash": catalog_hash(),
            "model_family": model_family.value,
            "seed": seed,
            "shots_per_source": shots_per_source,
            "datasets": [f"{task.value}.{source.value}" for task, source in keys],
            "restrict_types": restrict_types,
            "records": len(records),
        }
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(dumps_line(header))
        for record in records:
            handle.write(dumps_line(record))
    logger.info(f"Wrote {len(records)} finetuning samples to {path}")
    return len(records)


def default_tasks(source: SourceId, tasks: Optional[Iterable[Union[Task, str]]] = None) -> List[Task]:
    """Tasks a source can contribute samples for, out of ``tasks`` (Task A only by default)."""
    wanted = [Task(task) for task in (tasks or (Task.TERM_TYPING,))]
    return [task for task in wanted if source in CATALOG_SOURCES[task]]
