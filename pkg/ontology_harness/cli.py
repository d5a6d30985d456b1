"""Command-line interface for the ontology harness."""

import json
import logging
import os
import sys
from typing import Optional, Tuple

import click
from colorama import Fore, Style
from colorama import init as colorama_init

from .config.config_manager import ConfigManager
from .core.manifest import read_manifest, run_directory
from .core.models import ModelFamily, SourceId, Task
from .core.runner import HarnessRunner
from .datasets import dataset_stats
from .prompts import dump_catalog
from .utils.formatters import format_count, format_date, format_elapsed, format_score

TASKS = [task.value for task in Task]
SOURCES = [source.value for source in SourceId]
FAMILIES = [family.value for family in ModelFamily]


def setup_logging(level: str, log_file: Optional[str] = None):
    """Set up logging configuration."""
    numeric_level = getattr(logging, level.upper(), None)
    if not isinstance(numeric_level, int):
        raise ValueError(f'Invalid log level: {level}')

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(numeric_level)

    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    # stdout carries command output (catalog dumps, JSON reports)
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    if log_file:
        try:
            file_handler = logging.FileHandler(log_file)
            file_handler.setFormatter(formatter)
            root_logger.addHandler(file_handler)
        except Exception as e:
            click.echo(f"Warning: Could not set up file logging: {e}", err=True)


def _ok(message: str) -> None:
    click.echo(f"{Fore.GREEN}✅ {message}{Style.RESET_ALL}")


def _fail(action: str, error: Exception) -> None:
    """Report an error on stderr and exit with its code (1 data, 2 configuration)."""
    click.echo(f"{Fore.RED}❌ {action} failed: {error}{Style.RESET_ALL}", err=True)
    sys.exit(getattr(error, 'exit_code', 1))


def _load_config(ctx) -> ConfigManager:
    config_manager = ConfigManager(ctx.obj.get('config_path'))
    config_manager.load_config()
    logging_config = config_manager.get_logging_config()
    setup_logging(ctx.obj.get('log_level') or logging_config.get('level') or 'INFO',
                  ctx.obj.get('log_file') or logging_config.get('file'))
    return config_manager


@click.group()
@click.option('--config', '-c', 'config_path',
              help='Path to configuration file')
@click.option('--log-level', default=None,
              type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False),
              help='Logging level (default: logging.level from the config, else INFO)')
@click.option('--log-file',
              help='Log file path')
@click.pass_context
def cli(ctx, config_path: Optional[str], log_level: Optional[str], log_file: Optional[str]):
    """Ontology Harness - build ontology-learning task datasets and evaluate language models on them."""
    ctx.ensure_object(dict)
    setup_logging(log_level or 'INFO', log_file)
    ctx.obj['config_path'] = config_path
    ctx.obj['log_level'] = log_level
    ctx.obj['log_file'] = log_file


@cli.command()
@click.argument('source', type=click.Choice(SOURCES))
@click.option('--output', '-o', 'output_path', required=True, type=click.Path(dir_okay=False),
              help='Corpus JSONL file to write (a .taxonomy.json sidecar is written next to it)')
@click.pass_context
def ingest(ctx, source: str, output_path: str):
    """Parse a knowledge source into a canonical corpus file."""
    try:
        runner = HarnessRunner(_load_config(ctx))
        corpus = runner.ingest(SourceId(source), output_path)
        _ok(f"Ingested {source}: {format_count(len(corpus.records))} terms, "
            f"{format_count(len(corpus.type_inventory))} types")
        for name, count in sorted(corpus.warnings.items()):
            if count:
                click.echo(f"   {Fore.YELLOW}⚠️  {name.replace('_', ' ')}: {format_count(count)}{Style.RESET_ALL}")
    except Exception as e:
        _fail("Ingest", e)


@cli.command()
@click.argument('task', type=click.Choice(TASKS))
@click.argument('corpus_path', type=click.Path(exists=True, dir_okay=False))
@click.option('--output', '-o', 'output_path', required=True, type=click.Path(dir_okay=False),
              help='Dataset JSONL file to write')
@click.option('--closure-depth', type=click.IntRange(min=1), default=None,
              help='Task B: maximum ancestor distance of positive pairs (default: full closure)')
@click.option('--negative-count', type=click.IntRange(min=0), default=1896, show_default=True,
              help='Task C: number of negative triples to sample')
@click.option('--negative-seed', type=int, default=0, show_default=True,
              help='Task C: negative sampling seed')
@click.pass_context
def build(ctx, task: str, corpus_path: str, output_path: str, closure_depth: Optional[int],
          negative_count: int, negative_seed: int):
    """Build a task dataset from a corpus file, split as configured."""
    try:
        runner = HarnessRunner(_load_config(ctx))
        items = runner.build(Task(task), corpus_path, output_path, closure_depth, negative_count, negative_seed)
        stats = dataset_stats(items)
        _ok(f"Built Task {task} dataset: " + ", ".join(f"{key} {format_count(value)}"
                                                      for key, value in stats.items()))
    except Exception as e:
        _fail("Build", e)


@cli.group()
def templates():
    """Inspect the shipped prompt template catalogs."""


@templates.command('dump')
@click.option('--task', '-t', required=True, type=click.Choice(TASKS))
@click.option('--source', '-s', required=True, type=click.Choice(SOURCES))
@click.option('--family', '-f', required=True, type=click.Choice(FAMILIES))
def templates_dump(task: str, source: str, family: str):
    """Print one catalog as JSON lines."""
    try:
        click.echo(dump_catalog(task, source, family), nl=False)
    except Exception as e:
        _fail("Template dump", e)


@cli.command()
@click.option('--run-id', help='Run identifier (output subdirectory)')
@click.option('--task', type=click.Choice(TASKS))
@click.option('--source', type=click.Choice(SOURCES))
@click.option('--family', 'model_family', type=click.Choice(FAMILIES))
@click.option('--backend', help='Backend name from the backends section')
@click.option('--templates', 'template_selection',
              help="'all', 'best-of-8', or a comma-separated list of template ids")
@click.option('--parallelism', type=click.IntRange(min=1), help='Prompts in flight at once')
@click.option('--k', type=click.IntRange(min=1), help='MAP@k cutoff for Task A')
@click.option('--cache-dir', help='Response cache directory')
@click.option('--output-dir', help='Run output directory')
@click.option('--no-progress', is_flag=True, help='Hide progress bars')
@click.pass_context
def run(ctx, run_id, task, source, model_family, backend, template_selection, parallelism, k,
        cache_dir, output_dir, no_progress):
    """Run ingest, build, render, invoke, score and report for one configuration.

    Flags override the config file's run and paths sections. Re-running a
    run id resumes it.
    """
    try:
        config_manager = _load_config(ctx)
        templates_value = template_selection
        if template_selection and template_selection not in ('all', 'best-of-8'):
            templates_value = [t.strip() for t in template_selection.split(',') if t.strip()]
        config_manager.apply_overrides('run', {
            'run_id': run_id, 'task': task, 'source': source, 'model_family': model_family,
            'backend': backend, 'templates': templates_value, 'parallelism': parallelism, 'k': k,
        })
        config_manager.apply_overrides('paths', {'cache_dir': cache_dir, 'output_dir': output_dir})

        runner = HarnessRunner(config_manager, progress=not no_progress)
        click.echo("Starting run...")
        manifest, run_score = runner.run()

        _ok(f"Run {manifest.run_id} completed")
        metric = "MAP@1" if run_score.best.task == Task.TERM_TYPING else "F1"
        for report in run_score.reports:
            marker = " ⭐" if report.template_id == run_score.best.template_id else ""
            click.echo(f"   {report.template_id}: {metric} {format_score(report.primary_score)}{marker}")
        click.echo(f"   Backend requests: {runner.request_count}")
        click.echo(f"   Outputs: {run_directory(config_manager.get_paths_config()['output_dir'], manifest.run_id)}")
    except Exception as e:
        _fail("Run", e)


@cli.command()
@click.argument('run_id')
@click.option('--k', type=click.IntRange(min=1), help='MAP@k cutoff (default: the run\'s)')
@click.pass_context
def score(ctx, run_id: str, k: Optional[int]):
    """Re-score a run's stored responses without calling a backend."""
    try:
        runner = HarnessRunner(_load_config(ctx))
        run_score = runner.rescore(run_id, k)
        _ok(f"Re-scored {run_id}: best template {run_score.best.template_id} "
            f"({format_score(run_score.best.primary_score)})")
    except Exception as e:
        _fail("Scoring", e)


@cli.command()
@click.argument('run_ids', nargs=-1, required=True)
@click.option('--output', '-o', type=click.Choice(['text', 'json']), default='text',
              help='Output format')
@click.pass_context
def report(ctx, run_ids: Tuple[str, ...], output: str):
    """Summarize one or more runs."""
    try:
        config_manager = _load_config(ctx)
        summary = HarnessRunner(config_manager).report(list(run_ids))
        if output == 'json':
            click.echo(json.dumps(summary['data'], indent=2, ensure_ascii=False))
            return

        click.echo(summary['text'], nl=False)
        output_dir = config_manager.get_paths_config()['output_dir']
        for run_id in run_ids:
            manifest = read_manifest(run_directory(output_dir, run_id))
            click.echo(f"🕒 {run_id}: started {format_date(manifest.started_at)}, "
                       f"finished {format_date(manifest.finished_at)}, "
                       f"elapsed {format_elapsed(manifest.started_at, manifest.finished_at)}")
    except Exception as e:
        _fail("Report", e)


@cli.command('export-finetune')
@click.option('--source', '-s', 'sources', multiple=True, required=True, type=click.Choice(SOURCES),
              help='Knowledge source to sample from (repeatable)')
@click.option('--output', '-o', 'output_path', required=True, type=click.Path(dir_okay=False),
              help='JSONL file to write')
@click.option('--shots', type=click.IntRange(min=0), default=8, show_default=True,
              help='Samples per source and task')
@click.option('--seed', type=int, default=0, show_default=True, help='Sampling seed')
@click.option('--task', '-t', 'tasks', multiple=True, type=click.Choice(TASKS),
              help='Tasks to sample (repeatable; default A)')
@click.option('--family', 'model_family', type=click.Choice(FAMILIES), default=ModelFamily.SEQ2SEQ.value,
              show_default=True, help='Template family used to render instructions')
@click.option('--restrict-types', is_flag=True,
              help='Limit Task B/C samples to types among the selected Task A samples')
@click.pass_context
def export_finetune(ctx, sources, output_path, shots, seed, tasks, model_family, restrict_types):
    """Export few-shot instruction/target pairs from training partitions."""
    try:
        runner = HarnessRunner(_load_config(ctx))
        count = runner.export_finetune(sources, output_path, shots, seed, tasks or None,
                                       model_family, restrict_types)
        _ok(f"Wrote {count} samples to {output_path}")
    except Exception as e:
        _fail("Finetune export", e)


@cli.command()
@click.pass_context
def validate_config(ctx):
    """Validate configuration file."""
    try:
        config_manager = _load_config(ctx)
        _ok("Configuration loaded successfully")

        click.echo("\n📊 Configuration Summary:")
        sources = config_manager.get_sources_config()
        click.echo(f"   Sources: {', '.join(sorted(sources)) or 'none'}")
        for source in sorted(sources):
            for role, path in sorted(config_manager.get_source_config(source).items()):
                status = "" if path and os.path.exists(path) else f" {Fore.YELLOW}(missing){Style.RESET_ALL}"
                click.echo(f"     • {source}.{role}: {path}{status}")
        backends = config_manager.config_data.get('backends') or {}
        for backend_id in sorted(backends):
            backend = config_manager.get_backend_config(backend_id)
            target = backend.endpoint_url or "local stub"
            click.echo(f"     • {backend_id} ({backend.kind.value}): {target}")

        if config_manager.config_data.get('run', {}).get('run_id'):
            run_config = config_manager.get_run_config()
            click.echo(f"   Run: {run_config.run_id} - Task {run_config.task.value} on "
                       f"{run_config.source_id.value} with {run_config.backend_id} "
                       f"({run_config.model_family.value})")
            _ok("Run section valid")
    except Exception as e:
        _fail("Configuration validation", e)


def main():
    """Main CLI entry point."""
    colorama_init()
    cli()


if __name__ == '__main__':
    main()
