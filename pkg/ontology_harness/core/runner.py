"""Run orchestration: ingest, build, render, invoke, score and report."""

import json
import logging
import shutil
import time
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import httpx

from ..backends import BackendClient, ResponseCache, check_compatible, gold_answer, iter_dispatch
from ..backends.responses import read_responses, response_to_dict
from ..config.config_manager import ConfigManager
from ..datasets import (build_relation_triples, build_taxonomy_pairs, build_term_typing, dataset_stats,
                        read_dataset_jsonl, split_dataset, write_dataset_jsonl)
from ..evaluation import corpus_answer_space, score_run, write_report
from ..evaluation.scorer import scored_items
from ..ingest import load_source, read_corpus_jsonl, write_corpus_jsonl
from ..prompts import catalog_hash, render, template_catalog
from ..reporters.summary_reporter import RESPONSES_FILE, SummaryReporter
from ..utils.formatters import utc_timestamp
from ..utils.jsonl import dumps_line, write_jsonl
from .errors import ConfigurationError, EmptyDatasetError, IntegrityError, NotFoundError
from .finetune import default_tasks, export_finetune_samples
from .manifest import (COMPLETED, DATASET_FILE, FAILED, PENDING, RunLock, config_snapshot, dataset_hash,
                       new_manifest, read_manifest, run_directory, verify_manifest, write_manifest)
from .models import (BackendConfig, BackendKind, ModelFamily, PromptTemplate, RawResponse, RenderedPrompt,
                     RunConfig, RunManifest, RunScore, SourceCorpus, SourceId, Task, TaskItem)

CORPUS_FILE = "corpus.jsonl"
PROMPTS_FILE = "prompts.jsonl"
REPORTS_DIR = "reports"
SUMMARY_JSON = "summary.json"
SUMMARY_TEXT = "summary.txt"


class HarnessRunner:
    """Main run coordinator.

    A run owns ``<output_dir>/<run_id>/`` for its lifetime. Stages run in
    order and the manifest records each one as it completes or fails.
    Re-running a run id resumes it: completed ingest/build work is read back
    and checked against the manifest hashes, and prompts already answered
    come from the response cache instead of the backend.
    """

    def __init__(self, config_manager: ConfigManager, transport: Optional[httpx.BaseTransport] = None,
                 sleep: Callable[[float], None] = time.sleep, progress: bool = True):
        """Initialize the runner.

        Args:
            config_manager: Loaded configuration.
            transport: Optional httpx transport for wire backends (tests use a mock).
            sleep: Sleep function used between retries.
            progress: Whether to show progress bars.
        """
        self.config_manager = config_manager
        self.transport = transport
        self.sleep = sleep
        self.progress = progress
        self.request_count = 0
        self.logger = logging.getLogger(__name__)

    # ------------------------------------------------------------------
    # Full runs
    # ------------------------------------------------------------------

    def run(self, config: Optional[RunConfig] = None) -> Tuple[RunManifest, RunScore]:
        """Run every stage for ``config`` (by default the configured run section).

        Returns:
            The completed manifest and the run's scores.

        Raises:
            HarnessError: Whatever stopped a stage; the manifest is marked failed
                at that stage first and partial outputs stay on disk.
        """
        config = config or self.config_manager.get_run_config()
        backend = self.config_manager.get_backend_config(config.backend_id)
        run_dir = run_directory(config.output_dir, config.run_id)
        self.logger.info(f"Starting run {config.run_id}: Task {config.task.value} on {config.source_id.value} "
                         f"with {backend.backend_id} ({config.model_family.value})")

        with RunLock(run_dir):
            manifest = self._open_manifest(config, run_dir)
            corpus = self._stage(manifest, run_dir, "ingest", lambda: self._ingest(config, manifest, run_dir))
            items = self._stage(manifest, run_dir, "build", lambda: self._build(config, corpus, manifest, run_dir))
            scored = scored_items(items)
            prompts, template_ids = self._stage(manifest, run_dir, "render",
                                                lambda: self._render(config, backend, scored, manifest, run_dir))
            responses = self._stage(manifest, run_dir, "invoke",
                                    lambda: self._invoke(config, backend, scored, prompts, run_dir))
            run_score = self._stage(manifest, run_dir, "score",
                                    lambda: self._score(config, corpus, items, responses, template_ids, run_dir))
            self._stage(manifest, run_dir, "report", lambda: self._report(config.output_dir, config.run_id, run_dir))
            manifest.finished_at = utc_timestamp()
            write_manifest(manifest, run_dir)

        self.logger.info(f"Run {config.run_id} complete: best template {run_score.best.template_id} "
                         f"scored {run_score.best.primary_score:.4f}")
        return manifest, run_score

    def _open_manifest(self, config: RunConfig, run_dir: Path) -> RunManifest:
        try:
            manifest = read_manifest(run_dir)
        except NotFoundError:
            manifest = new_manifest(config)
            write_manifest(manifest, run_dir)
            return manifest

        if manifest.config_snapshot != config_snapshot(config):
            raise ConfigurationError(f"Run {config.run_id} already exists with a different configuration; "
                                     f"use a new run_id")
        self.logger.info(f"Resuming run {config.run_id}")
        manifest.failure = None
        manifest.finished_at = None
        for stage, state in manifest.stages.items():
            if state == FAILED:
                manifest.stages[stage] = PENDING
        write_manifest(manifest, run_dir)
        return manifest

    def _stage(self, manifest: RunManifest, run_dir: Path, stage: str, action: Callable[[], Any]) -> Any:
        self.logger.info(f"[{manifest.run_id}] {stage}")
        try:
            result = action()
        except Exception as e:
            manifest.stages[stage] = FAILED
            manifest.failure = f"{stage}: {e}"
            write_manifest(manifest, run_dir)
            self.logger.error(f"Run {manifest.run_id} failed at stage {stage}: {e}")
            raise
        manifest.stages[stage] = COMPLETED
        write_manifest(manifest, run_dir)
        return result

    # ------------------------------------------------------------------
    # Stages
    # ------------------------------------------------------------------

    def load_corpus(self, source_id: SourceId) -> SourceCorpus:
        return load_source(source_id, self.config_manager.get_sources_config())

    def _ingest(self, config: RunConfig, manifest: RunManifest, run_dir: Path) -> SourceCorpus:
        corpus_path = run_dir / CORPUS_FILE
        if manifest.stages.get("ingest") == COMPLETED and corpus_path.exists():
            self.logger.info(f"Reading ingested corpus from {corpus_path}")
            return read_corpus_jsonl(corpus_path)
        corpus = self.load_corpus(config.source_id)
        write_corpus_jsonl(corpus, corpus_path)
        return corpus

    def build_items(self, task: Task, corpus: SourceCorpus, split=None, closure_depth: Optional[int] = None,
                    negative_count: int = 1896, negative_seed: int = 0) -> List[TaskItem]:
        """Build one task's dataset from a corpus, split when ``split`` is given.

        Raises:
            EmptyDatasetError: If the corpus lacks what the task needs.
        """
        dataset_id = f"{task.value}.{corpus.source_id.value}"
        if task == Task.TERM_TYPING:
            items = build_term_typing(corpus)
        elif corpus.taxonomy is None:
            raise EmptyDatasetError(f"Source {corpus.source_id.value} has no taxonomy for Task {task.value}")
        elif task == Task.TAXONOMY_DISCOVERY:
            items = build_taxonomy_pairs(corpus.taxonomy, closure_depth, dataset_id)
        else:
            items = build_relation_triples(corpus.relations or (), corpus.taxonomy, negative_count,
                                           negative_seed, dataset_id, corpus.relation_inventory)
        if split is not None:
            train, test = split_dataset(items, split)
            items = sorted(train + test, key=lambda item: item.item_id)
        return items

    def _build(self, config: RunConfig, corpus: SourceCorpus, manifest: RunManifest,
               run_dir: Path) -> List[TaskItem]:
        path = run_dir / DATASET_FILE
        if manifest.stages.get("build") == COMPLETED and path.exists():
            verify_manifest(manifest, run_dir)
            self.logger.info(f"Dataset hash verified, reading {path}")
            return read_dataset_jsonl(path, config.task)

        items = self.build_items(config.task, corpus, config.split, config.closure_depth,
                                 config.negative_count, config.negative_seed)
        write_dataset_jsonl(items, path)
        digest = dataset_hash(run_dir)
        if manifest.dataset_hash is not None and manifest.dataset_hash != digest:
            raise IntegrityError(f"Rebuilt dataset of run {config.run_id} differs from the recorded one")
        manifest.dataset_hash = digest

        stats: Dict[str, Any] = dict(dataset_stats(items))
        stats["types"] = len(corpus.type_inventory)
        if corpus.taxonomy is not None:
            stats["levels"] = corpus.taxonomy.level_count
            if config.task != Task.TERM_TYPING:
                stats["types"] = len(corpus.taxonomy.nodes)
        if config.task == Task.RELATION_EXTRACTION:
            stats["relations"] = len(corpus.relation_inventory)
        manifest.dataset_stats = stats
        self.logger.info(f"Built {len(items)} items: {stats}")
        return items

    def select_templates(self, config: RunConfig) -> List[PromptTemplate]:
        """Templates of the run's catalog: all of them, or the configured ids in catalog order.

        Raises:
            CatalogMissingError: If the catalog does not exist.
            ConfigurationError: If a configured id is not in the catalog.
        """
        catalog = template_catalog(config.task, config.source_id, config.model_family)
        if isinstance(config.templates, str):
            return catalog
        wanted = set(config.templates)
        unknown = sorted(wanted - {template.template_id for template in catalog})
        if unknown:
            raise ConfigurationError(f"Templates not in the Task {config.task.value} {config.source_id.value} "
                                     f"{config.model_family.value} catalog: {unknown}")
        return [template for template in catalog if template.template_id in wanted]

    def _render(self, config: RunConfig, backend: BackendConfig, items: Sequence[TaskItem],
                manifest: RunManifest, run_dir: Path) -> Tuple[List[RenderedPrompt], List[str]]:
        current = catalog_hash()
        if manifest.catalog_hash is not None and manifest.catalog_hash != current:
            raise IntegrityError(f"Template catalogs changed since run {config.run_id} was rendered")
        manifest.catalog_hash = current

        templates = self.select_templates(config)
        prompts = [render(template, item, backend.mask_token) for template in templates for item in items]
        write_jsonl(({"template_id": p.template_id, "item_id": p.item_id, "text": p.text} for p in prompts),
                    run_dir / PROMPTS_FILE)
        manifest.dataset_stats["scored_items"] = len(items)
        manifest.dataset_stats["templates"] = len(templates)
        manifest.dataset_stats["prompts"] = len(prompts)
        return prompts, [template.template_id for template in templates]

    def _invoke(self, config: RunConfig, backend: BackendConfig, items: Sequence[TaskItem],
                prompts: Sequence[RenderedPrompt], run_dir: Path) -> List[RawResponse]:
        check_compatible(backend, config.model_family)
        oracle = None
        if backend.kind == BackendKind.STUB_ECHO_GOLD:
            oracle = {item.item_id: gold_answer(item) for item in items}

        responses: List[RawResponse] = []
        with BackendClient(backend, transport=self.transport, oracle=oracle, sleep=self.sleep) as client, \
                open(run_dir / RESPONSES_FILE, "w", encoding="utf-8", newline="\n") as log:
            # stub answers depend on the item, not only the prompt text, so they are never cached
            cache = None if backend.kind.is_stub else ResponseCache(config.cache_dir, backend.backend_id)
            try:
                for response in iter_dispatch(client, prompts, cache, config.parallelism,
                                              config.model_family, progress=self.progress):
                    log.write(dumps_line(response_to_dict(response)))
                    log.flush()
                    responses.append(response)
            finally:
                self.request_count += client.request_count
                if cache is not None:
                    self.logger.info(f"Cache {backend.backend_id}: {cache.hits} hits, {cache.misses} misses")
                    cache.close()
        return responses

    def _score(self, config: RunConfig, corpus: SourceCorpus, items: Sequence[TaskItem],
               responses: Sequence[RawResponse], template_ids: Sequence[str], run_dir: Path) -> RunScore:
        space = corpus_answer_space(config.task, corpus, self.config_manager.get_synonyms_dir())
        run_score = score_run(responses, items, space, k=config.k,
                              dataset_id=f"{config.task.value}.{config.source_id.value}",
                              backend_id=config.backend_id, template_ids=template_ids)

        reports_dir = run_dir / REPORTS_DIR
        if reports_dir.exists():
            shutil.rmtree(reports_dir)
        for report in run_score.reports:
            write_report(report, reports_dir)
        summary = {
            "run_id": config.run_id,
            "best": {"template_id": run_score.best.template_id, "score": run_score.best.primary_score},
            "best_templates": run_score.summary,
        }
        with open(run_dir / SUMMARY_JSON, "w", encoding="utf-8", newline="\n") as handle:
            json.dump(summary, handle, ensure_ascii=False, indent=2)
            handle.write("\n")
        return run_score

    def _report(self, output_dir: str, run_id: str, run_dir: Path) -> str:
        text = SummaryReporter(output_dir).build([run_id])["text"]
        with open(run_dir / SUMMARY_TEXT, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        return text

    # ------------------------------------------------------------------
    # Re-scoring and reporting
    # ------------------------------------------------------------------

    def rescore(self, run_id: str, k: Optional[int] = None) -> RunScore:
        """Score a stored response log again without touching a backend.

        Raises:
            NotFoundError: If the run does not exist.
            IntegrityError: If the dataset changed or the log does not cover it.
        """
        run_dir = run_directory(self.config_manager.get_paths_config()['output_dir'], run_id)
        with RunLock(run_dir):
            manifest = read_manifest(run_dir)
            verify_manifest(manifest, run_dir, catalog_hash())
            snapshot = manifest.config_snapshot
            task = Task(snapshot["task"])
            corpus = read_corpus_jsonl(run_dir / CORPUS_FILE)
            items = read_dataset_jsonl(run_dir / DATASET_FILE, task)
            responses = read_responses(run_dir / RESPONSES_FILE)
            config = RunConfig(run_id=run_id, task=task, source_id=SourceId(snapshot["source_id"]),
                               model_family=ModelFamily(snapshot["model_family"]),
                               backend_id=snapshot["backend_id"],
                               templates=self._snapshot_templates(snapshot),
                               k=k if k is not None else snapshot.get("k", 1))
            template_ids = [template.template_id for template in self.select_templates(config)]
            run_score = self._stage(manifest, run_dir, "score",
                                    lambda: self._score(config, corpus, items, responses, template_ids, run_dir))
            self._stage(manifest, run_dir, "report",
                        lambda: self._report(str(run_dir.parent), run_id, run_dir))
        return run_score

    @staticmethod
    def _snapshot_templates(snapshot: Dict[str, Any]) -> Union[str, Tuple[str, ...]]:
        templates = snapshot.get("templates", "best-of-8")
        return templates if isinstance(templates, str) else tuple(templates)

    def report(self, run_ids: Union[str, Sequence[str]]) -> Dict[str, Any]:
        """Summarize one or more runs after checking their dataset hashes.

        Returns:
            ``{"text": summary text, "data": machine-readable summary}``.

        Raises:
            NotFoundError: If a run does not exist.
            IntegrityError: If a run's dataset no longer matches its manifest.
        """
        if isinstance(run_ids, str):
            run_ids = [run_ids]
        output_dir = self.config_manager.get_paths_config()['output_dir']
        current = catalog_hash()
        for run_id in run_ids:
            run_dir = run_directory(output_dir, run_id)
            manifest = read_manifest(run_dir)
            if manifest.dataset_hash is not None:
                verify_manifest(manifest, run_dir, current)
        return SummaryReporter(output_dir).build(run_ids)

    # ------------------------------------------------------------------
    # Standalone steps
    # ------------------------------------------------------------------

    def ingest(self, source_id: SourceId, path: Union[str, Path]) -> SourceCorpus:
        """Parse a source and write its canonical corpus file."""
        corpus = self.load_corpus(source_id)
        write_corpus_jsonl(corpus, path)
        return corpus

    def build(self, task: Task, corpus_path: Union[str, Path], path: Union[str, Path],
              closure_depth: Optional[int] = None, negative_count: int = 1896,
              negative_seed: int = 0) -> List[TaskItem]:
        """Build a task dataset from a corpus file, split as configured, and write it."""
        corpus = read_corpus_jsonl(corpus_path)
        split = self.config_manager.get_split_config(task, corpus.source_id)
        items = self.build_items(task, corpus, split, closure_depth, negative_count, negative_seed)
        write_dataset_jsonl(items, path)
        return items

    def export_finetune(self, sources: Iterable[Union[SourceId, str]], path: Union[str, Path],
                        shots_per_source: int = 8, seed: int = 0,
                        tasks: Optional[Iterable[Union[Task, str]]] = None,
                        model_family: Union[ModelFamily, str] = ModelFamily.SEQ2SEQ,
                        restrict_types: bool = False) -> int:
        """Export finetuning samples from the training partitions of ``sources``.

        Each source contributes Task A shots, plus Task B/C shots when those
        tasks are requested and the source has a catalog for them.
        """
        samples: Dict[Tuple[Task, SourceId], List[TaskItem]] = {}
        for source in (SourceId(s) for s in sources):
            tasks_for_source = default_tasks(source, tasks)
            if not tasks_for_source:
                self.logger.info(f"No requested task has a catalog for {source.value}, skipping it")
                continue
            corpus = self.load_corpus(source)
            for task in tasks_for_source:
                split = self.config_manager.get_split_config(task, source)
                samples[(task, source)] = self.build_items(task, corpus, split)
        return export_finetune_samples(samples, path, shots_per_source, seed, model_family, restrict_types)
