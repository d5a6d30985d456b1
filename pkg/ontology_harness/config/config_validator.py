"""Configuration validation for the ontology harness."""

from fractions import Fraction
from typing import Any, Dict

from ..core.errors import ConfigurationError
from ..core.models import BackendKind, ModelFamily, SourceId, Task


class ConfigValidator:
    """Validates harness configuration."""

    REQUIRED_SECTIONS = ['sources']
    KNOWN_SECTIONS = ['run', 'sources', 'backends', 'splits', 'paths', 'logging']
    TEMPLATE_SELECTIONS = ['all', 'best-of-8']
    INTEGER_BOUNDS = {
        'max_output_tokens': 1,
        'max_retries': 0,
        'top_k': 1,
    }
    RUN_INTEGER_BOUNDS = {
        'parallelism': 1,
        'k': 1,
        'closure_depth': 1,
        'negative_count': 0,
        'negative_seed': 0,
    }

    def validate(self, config: Dict[str, Any]) -> None:
        """Validate configuration data.

        Args:
            config: Configuration dictionary to validate.

        Raises:
            ConfigurationError: If configuration is invalid.
        """
        if not isinstance(config, dict):
            raise ConfigurationError("Configuration must be a mapping of sections")
        self._validate_structure(config)
        self._validate_sources(config.get('sources') or {})
        self._validate_backends(config.get('backends') or {})
        self._validate_splits(config.get('splits') or {})

    def _validate_structure(self, config: Dict[str, Any]) -> None:
        missing_sections = [section for section in self.REQUIRED_SECTIONS if section not in config]
        if missing_sections:
            raise ConfigurationError(f"Missing required configuration sections: {missing_sections}")

        unknown = [section for section in config if section not in self.KNOWN_SECTIONS]
        if unknown:
            raise ConfigurationError(f"Unknown configuration sections: {unknown}")

        for section in self.KNOWN_SECTIONS:
            value = config.get(section)
            if value is not None and not isinstance(value, dict):
                raise ConfigurationError(f"Section '{section}' must be a mapping")

    def _validate_sources(self, sources: Dict[str, Any]) -> None:
        known = {source.value for source in SourceId}
        for name, paths in sources.items():
            if name not in known:
                raise ConfigurationError(f"sources.{name}: unknown source (expected one of {sorted(known)})")
            if not isinstance(paths, dict):
                raise ConfigurationError(f"sources.{name} must map file roles to paths")

    def _validate_backends(self, backends: Dict[str, Any]) -> None:
        for backend_id, backend in backends.items():
            prefix = f"backends.{backend_id}"
            if not isinstance(backend, dict):
                raise ConfigurationError(f"{prefix} must be a mapping")

            kind = backend.get('kind')
            try:
                kind = BackendKind(kind)
            except ValueError:
                raise ConfigurationError(f"{prefix}.kind must be one of "
                                         f"{[k.value for k in BackendKind]}, got {kind!r}")

            if kind.is_stub and backend.get('endpoint_url'):
                raise ConfigurationError(f"{prefix}.endpoint_url must not be set for stub kind {kind.value}")
            if not kind.is_stub:
                if not backend.get('endpoint_url'):
                    raise ConfigurationError(f"{prefix}.endpoint_url is required for kind {kind.value}")
                if not backend.get('model_name'):
                    raise ConfigurationError(f"{prefix}.model_name is required for kind {kind.value}")
            if kind == BackendKind.STUB_CONSTANT and backend.get('stub_constant_text') is None:
                raise ConfigurationError(f"{prefix}.stub_constant_text is required for stub_constant")

            for key in ('temperature', 'request_timeout', 'backoff_seconds', 'requests_per_second'):
                value = backend.get(key)
                if value is None:
                    continue
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ConfigurationError(f"{prefix}.{key} must be a number, got {value!r}")
                if value < 0 or (key in ('request_timeout', 'requests_per_second') and value == 0):
                    raise ConfigurationError(f"{prefix}.{key} is out of range: {value}")

            self._validate_integers(backend, self.INTEGER_BOUNDS, prefix)

    def _validate_splits(self, splits: Dict[str, Any]) -> None:
        for key, split in splits.items():
            prefix = f"splits.{key}"
            task, _, source = str(key).partition('.')
            if task not in {t.value for t in Task}:
                raise ConfigurationError(f"{prefix}: key must be a task letter, optionally with .<source>")
            if source and source not in {s.value for s in SourceId}:
                raise ConfigurationError(f"{prefix}: unknown source {source!r}")
            if split is None:
                continue
            if not isinstance(split, dict) or 'test_fraction' not in split:
                raise ConfigurationError(f"{prefix} must set test_fraction (or be null)")
            try:
                fraction = Fraction(str(split['test_fraction']))
            except (ValueError, ZeroDivisionError):
                raise ConfigurationError(f"{prefix}.test_fraction must be a number")
            if not (0 < fraction <= 1):
                raise ConfigurationError(f"{prefix}.test_fraction must be in (0, 1], got {split['test_fraction']}")
            self._validate_integers(split, {'seed': 0}, prefix)

    def validate_run(self, run: Dict[str, Any], backends: Dict[str, Any]) -> None:
        """Validate a ``run`` section against the configured backends.

        Raises:
            ConfigurationError: If a field is missing, out of range or refers to
                something that is not configured.
        """
        missing = [key for key in ('run_id', 'task', 'source', 'model_family', 'backend') if not run.get(key)]
        if missing:
            raise ConfigurationError(f"run section missing required fields: {missing}")

        for key, enum in (('task', Task), ('source', SourceId), ('model_family', ModelFamily)):
            try:
                enum(run[key])
            except ValueError:
                raise ConfigurationError(f"run.{key} must be one of {[e.value for e in enum]}, got {run[key]!r}")

        if run['backend'] not in backends:
            raise ConfigurationError(f"run.backend refers to unknown backend {run['backend']!r}")

        run_id = str(run['run_id'])
        if '/' in run_id or '\\' in run_id or run_id in ('.', '..'):
            raise ConfigurationError(f"run.run_id must be a plain directory name, got {run_id!r}")

        templates = run.get('templates', 'best-of-8')
        if isinstance(templates, str):
            if templates not in self.TEMPLATE_SELECTIONS:
                raise ConfigurationError(f"run.templates must be one of {self.TEMPLATE_SELECTIONS} "
                                         f"or a list of template ids, got {templates!r}")
        elif not isinstance(templates, list) or not templates:
            raise ConfigurationError("run.templates must be a non-empty list of template ids")

        self._validate_integers(run, self.RUN_INTEGER_BOUNDS, 'run')

    def _validate_integers(self, section: Dict[str, Any], bounds: Dict[str, int], prefix: str) -> None:
        for key, minimum in bounds.items():
            value = section.get(key)
            if value is None:
                continue
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigurationError(f"{prefix}.{key} must be an integer, got {value!r}")
            if value < minimum:
                raise ConfigurationError(f"{prefix}.{key} must be at least {minimum}, got {value}")
