"""Deterministic stratified train/test splits."""

import logging
import math
import random
from dataclasses import replace
from typing import Dict, Hashable, List, Sequence, Tuple

from ..core.errors import EmptyDatasetError
from ..core.models import Partition, SplitSpec, TaskItem

logger = logging.getLogger(__name__)


def _stratum(item: TaskItem) -> Hashable:
    return getattr(item, "label", None)


def held_out_size(n_items: int, spec: SplitSpec) -> int:
    """Test partition size: ceil(n * test_fraction), computed exactly."""
    return math.ceil(spec.test_fraction * n_items)


def _quotas(groups: Dict[Hashable, List[TaskItem]], n_test: int, spec: SplitSpec) -> Dict[Hashable, int]:
    """Per-group test quotas by largest remainder, summing to ``n_test``."""
    exact = {key: spec.test_fraction * len(members) for key, members in groups.items()}
    quotas = {key: math.floor(value) for key, value in exact.items()}
    leftover = n_test - sum(quotas.values())
    order = sorted(groups, key=lambda key: (-(exact[key] - quotas[key]), repr(key)))
    for key in order[:leftover]:
        quotas[key] += 1
    return quotas


def split_dataset(items: Sequence[TaskItem], spec: SplitSpec) -> Tuple[List[TaskItem], List[TaskItem]]:
    """Split items into train and test partitions.

    Items are sorted by item id, grouped by label (Task B/C) or kept as one
    group (Task A), and each group is shuffled with a generator seeded from
    ``spec.seed``. Each group contributes its share of the
    ``ceil(n * test_fraction)`` test items, so label balance carries over to
    both sides.

    Returns:
        (train, test), each sorted by item id with ``partition`` set.

    Raises:
        EmptyDatasetError: If there are no items.
    """
    if not items:
        raise EmptyDatasetError("Cannot split an empty dataset")

    ordered = sorted(items, key=lambda item: item.item_id)
    groups: Dict[Hashable, List[TaskItem]] = {}
    for item in ordered:
        groups.setdefault(_stratum(item), []).append(item)

    n_test = held_out_size(len(ordered), spec)
    quotas = _quotas(groups, n_test, spec)

    rng = random.Random(spec.seed)
    train: List[TaskItem] = []
    test: List[TaskItem] = []
    for key in sorted(groups, key=repr):
        members = list(groups[key])
        rng.shuffle(members)
        test.extend(replace(item, partition=Partition.TEST) for item in members[:quotas[key]])
        train.extend(replace(item, partition=Partition.TRAIN) for item in members[quotas[key]:])

    train.sort(key=lambda item: item.item_id)
    test.sort(key=lambda item: item.item_id)
    logger.info(f"Split {len(ordered)} items into {len(train)} train / {len(test)} test "
                f"(test_fraction={spec.test_fraction}, seed={spec.seed})")
    return train, test
