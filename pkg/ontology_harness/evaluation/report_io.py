"""Per-template report files: ``<template>.json`` plus a ``<template>.ledger.jsonl`` of item outcomes."""

import json
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, List, Union

from ..core.errors import ParseError
from ..core.models import EvalReport, LedgerEntry, Task
from ..utils.jsonl import read_jsonl, write_jsonl

REPORT_FIELDS = ("task", "dataset_id", "backend_id", "template_id", "n_items", "k",
                 "map_at_1", "map_at_k", "precision", "recall", "f1")


def report_to_dict(report: EvalReport) -> Dict[str, Any]:
    data = {name: getattr(report, name) for name in REPORT_FIELDS}
    data["task"] = report.task.value
    data["primary_score"] = report.primary_score
    return data


def report_from_dict(data: Dict[str, Any]) -> EvalReport:
    fields = {name: data.get(name) for name in REPORT_FIELDS}
    fields["task"] = Task(fields["task"])
    fields["k"] = fields["k"] or 1
    return EvalReport(**fields)


def _ledger_row(entry: LedgerEntry) -> Dict[str, Any]:
    row = asdict(entry)
    row["predicted"] = list(entry.predicted)
    row["gold"] = list(entry.gold)
    return row


def write_report(report: EvalReport, reports_dir: Union[str, Path]) -> Path:
    """Write a report and its ledger; returns the report path."""
    reports_dir = Path(reports_dir)
    reports_dir.mkdir(parents=True, exist_ok=True)
    path = reports_dir / f"{report.template_id}.json"
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(report_to_dict(report), handle, ensure_ascii=False, indent=2)
        handle.write("\n")
    write_jsonl((_ledger_row(entry) for entry in report.per_item),
                reports_dir / f"{report.template_id}.ledger.jsonl")
    return path


def read_reports(reports_dir: Union[str, Path], with_ledger: bool = False) -> List[EvalReport]:
    """Read every report in a directory, ordered by template id."""
    reports = []
    for path in sorted(Path(reports_dir).glob("*.json")):
        try:
            with open(path, "r", encoding="utf-8") as handle:
                report = report_from_dict(json.load(handle))
        except (ValueError, KeyError, TypeError) as e:
            raise ParseError(f"bad report ({e})", str(path))
        if with_ledger:
            ledger = path.with_name(f"{report.template_id}.ledger.jsonl")
            report.per_item = [LedgerEntry(item_id=row["item_id"], predicted=tuple(row["predicted"]),
                                           gold=tuple(row["gold"]), hit=row["hit"],
                                           ambiguous=row.get("ambiguous", False), miss=row.get("miss", False))
                               for row in read_jsonl(ledger)]
        reports.append(report)
    return reports
