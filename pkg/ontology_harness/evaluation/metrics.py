"""Ranking and classification metrics."""

from typing import AbstractSet, Mapping, Sequence, Tuple

import numpy as np

from ..core.errors import IntegrityError
from ..core.models import Prediction


def ap_at_k(gold: AbstractSet[str], predicted: Sequence[str], k: int = 1) -> float:
    """Average precision of a ranked prediction against a gold set, truncated at ``k``."""
    if not gold:
        return 0.0
    predicted = list(predicted)[:k]
    score = 0.0
    hits = 0.0
    for i, label in enumerate(predicted):
        if label in gold and label not in predicted[:i]:
            hits += 1.0
            score += hits / (i + 1.0)
    return score / min(len(gold), k)


def _check_known(predictions: Sequence[Prediction], golds: Mapping) -> None:
    unknown = [p.item_id for p in predictions if p.item_id not in golds]
    if unknown:
        raise IntegrityError("Predictions for items without gold labels", unknown)


def map_at_k(predictions: Sequence[Prediction], golds: Mapping[str, AbstractSet[str]], k: int = 1) -> float:
    """Mean average precision at ``k`` over all predictions.

    Raises:
        IntegrityError: If a prediction has no gold entry.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    _check_known(predictions, golds)
    if not predictions:
        return 0.0
    return float(np.mean([ap_at_k(golds[p.item_id], p.ranked_labels, k) for p in predictions]))


def prf1(predictions: Sequence[Prediction], golds: Mapping[str, bool],
         positive_label: str = "true") -> Tuple[float, float, float]:
    """Precision, recall and F1 of the positive class.

    Empty predictions count as negative. Zero denominators give 0.

    Raises:
        IntegrityError: If a prediction has no gold entry.
    """
    _check_known(predictions, golds)
    tp = fp = fn = 0
    for prediction in predictions:
        predicted = prediction.top == positive_label
        actual = bool(golds[prediction.item_id])
        if predicted and actual:
            tp += 1
        elif predicted:
            fp += 1
        elif actual:
            fn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1
