"""Plain-text and machine-readable summaries of harness runs."""

import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

from jinja2 import Environment, FileSystemLoader
from tabulate import tabulate

from .. import __version__
from ..core.manifest import COMPLETED, FAILED, read_manifest, run_directory
from ..core.models import EvalReport, RunManifest, Task
from ..evaluation.report_io import read_reports, report_to_dict
from ..evaluation.scorer import best_report, best_template_summary, template_number
from ..utils.formatters import format_count, format_score

TEMPLATE_DIR = Path(__file__).parent / "templates"
RESPONSES_FILE = "responses.jsonl"

# Published dataset figures: Task A train/test/types per source, Task B type
# counts, levels, pair counts and splits, Task C relations, triples and split.
PUBLISHED_COUNTS: Dict[str, Dict[str, int]] = {
    "A.wordnet": {"train": 40559, "test": 9470, "types": 4},
    "A.geonames": {"train": 8078865, "test": 702510, "types": 680},
    "A.nci": {"train": 96177, "test": 24045, "types": 125},
    "A.medcin": {"train": 277028, "test": 69258, "types": 87},
    "A.snomedct_us": {"train": 278374, "test": 69594, "types": 125},
    "B.geonames": {"types": 689, "levels": 2, "positive": 680, "negative": 680, "train": 272, "test": 1088},
    "B.umls": {"types": 127, "levels": 3, "positive": 254, "negative": 254, "train": 101, "test": 407},
    "B.schemaorg": {"types": 797, "levels": 6, "positive": 2670, "negative": 2670, "train": 1086, "test": 4727},
    "C.umls": {"relations": 53, "positive": 5641, "negative": 1896, "train": 1507, "test": 6030},
}

DATASET_NOTES = {
    "B.schemaorg": ("The published schema.org split (1,086 train / 4,727 test = 5,813 pairs) does not add "
                    "up to its published 2,670 positive + 2,670 negative = 5,340 pairs; the pairs here "
                    "follow the pair construction, so the split cannot match both figures."),
}


def count_mismatches(dataset_id: str, stats: Dict[str, Any]) -> List[Dict[str, Any]]:
    """Compare materialized dataset counts with the published ones, field by field."""
    expected = PUBLISHED_COUNTS.get(dataset_id, {})
    rows = []
    for field, value in expected.items():
        actual = stats.get(field)
        rows.append({"field": field, "published": value, "actual": actual, "match": actual == value})
    return rows


def count_responses(run_dir: Path) -> int:
    path = run_dir / RESPONSES_FILE
    if not path.exists():
        return 0
    with open(path, "r", encoding="utf-8") as handle:
        return sum(1 for line in handle if line.strip())


class SummaryReporter:
    """Builds the run summary: a best-template grid plus per-run breakdowns."""

    def __init__(self, output_dir: Union[str, Path]):
        self.output_dir = Path(output_dir)
        self.logger = logging.getLogger(__name__)
        self.env = Environment(loader=FileSystemLoader(str(TEMPLATE_DIR)), keep_trailing_newline=True,
                               trim_blocks=True, lstrip_blocks=True, autoescape=False)

    def load_run(self, run_id: str) -> Dict[str, Any]:
        """Collect a run's manifest, reports and status into one summary record.

        Raises:
            NotFoundError: If the run does not exist.
        """
        run_dir = run_directory(self.output_dir, run_id)
        manifest = read_manifest(run_dir)
        reports = read_reports(run_dir / "reports") if (run_dir / "reports").is_dir() else []
        snapshot = manifest.config_snapshot
        dataset_id = f"{snapshot['task']}.{snapshot['source_id']}"

        answered = count_responses(run_dir)
        expected = int(manifest.dataset_stats.get("prompts", 0))
        status = self._status(manifest, reports)
        best = best_report(reports) if reports else None
        return {
            "run_id": manifest.run_id,
            "dataset_id": dataset_id,
            "task": snapshot["task"],
            "backend_id": snapshot["backend_id"],
            "model_family": snapshot["model_family"],
            "status": status,
            "status_line": self._status_line(status, answered, expected, manifest),
            "answered": answered,
            "expected": expected,
            "failure": manifest.failure,
            "dataset_hash": manifest.dataset_hash,
            "dataset_stats": dict(manifest.dataset_stats),
            "reports": [report_to_dict(report) for report in reports],
            "best": {"template_id": best.template_id, "score": best.primary_score} if best else None,
            "counts": count_mismatches(dataset_id, manifest.dataset_stats) if manifest.dataset_stats else [],
            "notes": [DATASET_NOTES[dataset_id]] if dataset_id in DATASET_NOTES else [],
            "_reports": reports,
        }

    @staticmethod
    def _status(manifest: RunManifest, reports: Sequence[EvalReport]) -> str:
        if manifest.is_complete:
            return "completed"
        if FAILED in manifest.stages.values():
            return "failed"
        if manifest.stages.get("score") == COMPLETED and reports:
            return "completed"
        return "partial"

    @staticmethod
    def _status_line(status: str, answered: int, expected: int, manifest: RunManifest) -> str:
        if status == "completed":
            return "completed"
        unit = "items" if manifest.dataset_stats.get("templates", 1) == 1 else "prompts"
        line = f"partial: {format_count(answered)}/{format_count(expected)} {unit}"
        if status == "failed":
            stage = next((name for name, state in manifest.stages.items() if state == FAILED), "?")
            line += f" (failed at {stage})"
        return line

    def _grid(self, runs: Sequence[Dict[str, Any]]) -> str:
        columns: List[str] = []
        rows: Dict[str, Dict[str, str]] = {}
        for run in runs:
            column = f"{run['backend_id']} ({run['model_family']})"
            if column not in columns:
                columns.append(column)
            cell = "-"
            if run["best"] is not None:
                number = template_number(run["best"]["template_id"])
                cell = f"{format_score(run['best']['score'])} [t{number}]"
            if run["status"] != "completed":
                cell = f"{cell} *" if cell != "-" else run["status"]
            rows.setdefault(run["dataset_id"], {})[column] = cell
        table = [[dataset_id] + [rows[dataset_id].get(column, "") for column in columns]
                 for dataset_id in sorted(rows)]
        return tabulate(table, headers=["Dataset"] + columns, tablefmt="simple")

    @staticmethod
    def _breakdown(reports: Sequence[EvalReport]) -> str:
        if not reports:
            return ""
        ordered = sorted(reports, key=lambda r: (template_number(r.template_id), r.template_id))
        if reports[0].task == Task.TERM_TYPING:
            headers = ["Template", "Items", "MAP@1", f"MAP@{reports[0].k}"]
            rows = [[r.template_id, format_count(r.n_items), format_score(r.map_at_1), format_score(r.map_at_k)]
                    for r in ordered]
        else:
            headers = ["Template", "Items", "Precision", "Recall", "F1"]
            rows = [[r.template_id, format_count(r.n_items), format_score(r.precision),
                     format_score(r.recall), format_score(r.f1)] for r in ordered]
        return tabulate(rows, headers=headers, tablefmt="simple")

    @staticmethod
    def _counts(counts: Sequence[Dict[str, Any]]) -> str:
        if not counts:
            return ""
        rows = [[c["field"], format_count(c["published"]), format_count(c["actual"]),
                 "ok" if c["match"] else "MISMATCH"] for c in counts]
        return tabulate(rows, headers=["Count", "Published", "Materialized", ""], tablefmt="simple")

    @staticmethod
    def _family_summary(reports: Sequence[EvalReport]) -> str:
        if not reports:
            return ""
        per_family = best_template_summary(reports)["per_family"]
        rows = [[family, f"t{entry['template']}", format_score(entry["mean_score"]),
                 ", ".join(f"{dataset}={format_score(score)}" for dataset, score in entry["datasets"].items())]
                for family, entry in per_family.items()]
        return tabulate(rows, headers=["Family", "Template", "Mean", "Per dataset"], tablefmt="simple")

    def build(self, run_ids: Sequence[str]) -> Dict[str, Any]:
        """Summarize runs: ``{"text": ..., "data": ...}``.

        Raises:
            NotFoundError: If any run does not exist.
        """
        runs = [self.load_run(run_id) for run_id in run_ids]
        all_reports = [report for run in runs for report in run["_reports"]]

        view = []
        for run in runs:
            entry = dict(run)
            entry["breakdown"] = self._breakdown(run["_reports"])
            entry["counts"] = self._counts(run["counts"])
            if run["best"]:
                entry["best"] = dict(run["best"], score_text=format_score(run["best"]["score"]))
            view.append(entry)

        text = self.env.get_template("run_summary.txt").render(
            runs=view,
            grid=self._grid(runs),
            family_summary=self._family_summary(all_reports),
            version=__version__,
        )
        data = {
            "runs": [{key: value for key, value in run.items() if not key.startswith("_")} for run in runs],
            "best_templates": best_template_summary(all_reports) if all_reports else {},
        }
        for run in runs:
            mismatched = [c["field"] for c in run["counts"] if not c["match"]]
            if mismatched:
                self.logger.warning(f"{run['dataset_id']}: counts differ from the published figures: "
                                    f"{', '.join(mismatched)}")
        return {"text": text, "data": data}

