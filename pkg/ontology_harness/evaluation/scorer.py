"""Scoring of backend responses against task datasets."""

import logging
from collections import defaultdict
from dataclasses import replace
from typing import Dict, Iterable, List, Optional, Sequence

from ..core.errors import IntegrityError
from ..core.models import (AnswerSpace, EvalReport, LedgerEntry, Partition, Prediction, RawResponse,
                           RunScore, Task, TaskItem)
from ..datasets.dataset_io import task_of
from .answer_space import map_boolean, map_ranked_term_types, map_term_type, variant_index
from .metrics import map_at_k, prf1

logger = logging.getLogger(__name__)


def template_number(template_id: str) -> int:
    return int(template_id.rsplit(".", 1)[1])


def template_family(template_id: str) -> str:
    """``A.wordnet.masked.4`` -> ``masked``."""
    return template_id.split(".")[2]


def scored_items(dataset: Iterable[TaskItem]) -> List[TaskItem]:
    """Items a run is scored on: the test partition, or everything when unsplit."""
    items = list(dataset)
    if any(item.partition is not None for item in items):
        items = [item for item in items if item.partition == Partition.TEST]
    return items


def _check_coverage(responses: Sequence[RawResponse], items: Sequence[TaskItem],
                    template_ids: Sequence[str]) -> Dict[str, Dict[str, RawResponse]]:
    item_ids = {item.item_id for item in items}
    by_template: Dict[str, Dict[str, RawResponse]] = {template_id: {} for template_id in template_ids}
    duplicates, unknown = [], []
    for response in responses:
        if response.item_id not in item_ids:
            unknown.append(response.item_id)
            continue
        seen = by_template.setdefault(response.template_id, {})
        if response.item_id in seen:
            duplicates.append(response.item_id)
        seen[response.item_id] = response
    if unknown:
        raise IntegrityError("Responses for items outside the scored dataset", unknown)
    if duplicates:
        raise IntegrityError("Items answered more than once for a template", duplicates)
    missing = sorted({item_id for seen in by_template.values() for item_id in item_ids - set(seen)})
    if missing:
        raise IntegrityError("Responses missing for items", missing)
    return by_template


def _predict(response: RawResponse, task: Task, space: AnswerSpace, index: Dict[str, str]) -> Prediction:
    if task == Task.TERM_TYPING:
        if response.ranked_tokens is not None:
            prediction = map_ranked_term_types(response.ranked_tokens, space, index)
        else:
            prediction = map_term_type(response.text or "", space, index)
    else:
        prediction = map_boolean(response.payload, space)
    return replace(prediction, item_id=response.item_id)


def score_template(responses: Dict[str, RawResponse], items: Sequence[TaskItem], task: Task,
                   space: AnswerSpace, k: int, dataset_id: str, backend_id: str,
                   template_id: str) -> EvalReport:
    """Score one template's responses into an EvalReport with a per-item ledger."""
    index = variant_index(space)
    predictions = [_predict(responses[item.item_id], task, space, index) for item in items]
    report = EvalReport(task=task, dataset_id=dataset_id, backend_id=backend_id,
                        template_id=template_id, n_items=len(items), k=k)

    if task == Task.TERM_TYPING:
        golds = {item.item_id: item.gold_types for item in items}
        report.map_at_1 = map_at_k(predictions, golds, 1)
        report.map_at_k = map_at_k(predictions, golds, k)
        for item, prediction in zip(items, predictions):
            report.per_item.append(LedgerEntry(
                item_id=item.item_id,
                predicted=prediction.ranked_labels,
                gold=tuple(sorted(item.gold_types)),
                hit=prediction.top in item.gold_types,
                ambiguous=prediction.ambiguous,
                miss=not prediction.ranked_labels,
            ))
    else:
        golds = {item.item_id: item.label for item in items}
        report.precision, report.recall, report.f1 = prf1(predictions, golds)
        for item, prediction in zip(items, predictions):
            gold = "true" if item.label else "false"
            predicted = prediction.top or "false"
            report.per_item.append(LedgerEntry(
                item_id=item.item_id,
                predicted=prediction.ranked_labels,
                gold=(gold,),
                hit=predicted == gold,
                miss=not prediction.ranked_labels,
            ))
    return report


def best_report(reports: Sequence[EvalReport]) -> EvalReport:
    """Highest primary score; ties go to the lowest template number."""
    return min(reports, key=lambda r: (-r.primary_score, template_number(r.template_id), r.template_id))


def best_template_summary(reports: Sequence[EvalReport]) -> Dict[str, object]:
    """Best-template selection per dataset and per model family.

    Per dataset, the best template of each dataset. Per family, the template
    number with the highest mean score across all datasets that family was
    run on, with its per-dataset scores.
    """
    per_dataset = {}
    by_dataset: Dict[str, List[EvalReport]] = defaultdict(list)
    for report in reports:
        by_dataset[report.dataset_id].append(report)
    for dataset_id in sorted(by_dataset):
        best = best_report(by_dataset[dataset_id])
        per_dataset[dataset_id] = {"template_id": best.template_id, "score": best.primary_score}

    per_family = {}
    by_family: Dict[str, Dict[int, List[EvalReport]]] = defaultdict(lambda: defaultdict(list))
    for report in reports:
        by_family[template_family(report.template_id)][template_number(report.template_id)].append(report)
    for family in sorted(by_family):
        means = {number: sum(r.primary_score for r in group) / len(group)
                 for number, group in by_family[family].items()}
        number = min(means, key=lambda n: (-means[n], n))
        per_family[family] = {
            "template": number,
            "mean_score": means[number],
            "datasets": {r.dataset_id: r.primary_score
                         for r in sorted(by_family[family][number], key=lambda r: r.dataset_id)},
        }
    return {"per_dataset": per_dataset, "per_family": per_family}


def score_run(responses: Sequence[RawResponse], dataset: Iterable[TaskItem], space: AnswerSpace,
              k: int = 1, dataset_id: str = "", backend_id: str = "",
              template_ids: Optional[Sequence[str]] = None) -> RunScore:
    """Score a run's responses, one report per template plus the best of them.

    Args:
        responses: Responses for every scored item under every template.
        dataset: The task dataset; only its test partition is scored when split.
        space: Answer space of the task.
        k: Cutoff for MAP@k (Task A).
        dataset_id: Dataset name recorded in the reports.
        backend_id: Backend recorded in the reports; taken from the responses when empty.
        template_ids: Templates that must be covered; defaults to those seen in the responses.

    Raises:
        IntegrityError: If responses are missing, duplicated or for unknown items.
    """
    items = scored_items(dataset)
    if not items:
        raise IntegrityError("No items to score")
    task = task_of(items[0])
    if not template_ids:
        template_ids = sorted({r.template_id for r in responses}, key=lambda t: (template_number(t), t))
    if not template_ids:
        raise IntegrityError("No responses to score", [item.item_id for item in items])
    backend_id = backend_id or (responses[0].backend_id if responses else "")

    by_template = _check_coverage(responses, items, template_ids)
    reports = [score_template(by_template[template_id], items, task, space, k, dataset_id,
                              backend_id, template_id)
               for template_id in template_ids]
    best = best_report(reports)
    for report in reports:
        logger.info(f"{report.template_id}: {report.primary_score:.4f} over {report.n_items} items")
    logger.info(f"Best template {best.template_id} ({best.primary_score:.4f})")
    return RunScore(reports=reports, best=best, summary=best_template_summary(reports))
