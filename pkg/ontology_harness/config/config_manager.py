"""Configuration management for the ontology harness."""

import copy
import os
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml

from ..core.errors import ConfigurationError
from ..core.models import (BackendConfig, BackendKind, ModelFamily, RunConfig, SourceId, SplitSpec, Task,
                           UMLS_SUBONTOLOGIES)
from .config_validator import ConfigValidator


class ConfigManager:
    """Manages configuration loading and validation for harness runs."""

    DEFAULT_CONFIG_LOCATIONS = [
        "config.yaml",
        "config.yml",
        os.path.expanduser("~/.ontology-harness/config.yaml"),
        os.path.expanduser("~/.ontology-harness/config.yml"),
        "/etc/ontology-harness/config.yaml",
        "/etc/ontology-harness/config.yml"
    ]

    # Held-out fractions that reproduce the published train/test sizes. WordNet
    # keeps the partitions of its dataset files unless a split is configured.
    DEFAULT_SPLITS = {
        'A': {'test_fraction': 0.2, 'seed': 0},
        'A.wordnet': None,
        'A.geonames': {'test_fraction': 0.08, 'seed': 0},
        'B': {'test_fraction': 0.8, 'seed': 0},
        'C': {'test_fraction': 0.8, 'seed': 0},
    }

    def __init__(self, config_path: Optional[str] = None):
        """Initialize configuration manager.

        Args:
            config_path: Optional path to config file. If not provided,
                        will search in default locations.
        """
        self.config_path = config_path
        self.config_data: Dict[str, Any] = {}
        self.validator = ConfigValidator()

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ConfigManager":
        """Build a manager from an in-memory configuration (validated the same way)."""
        manager = cls()
        manager.config_data = copy.deepcopy(dict(data))
        manager.validator.validate(manager.config_data)
        manager._set_defaults()
        return manager

    def load_config(self) -> Dict[str, Any]:
        """Load configuration from file.

        Returns:
            Dictionary containing configuration data.

        Raises:
            ConfigurationError: If the config file is missing or invalid.
        """
        config_file = self._find_config_file()

        try:
            with open(config_file, 'r', encoding='utf-8') as f:
                self.config_data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigurationError(f"Invalid YAML in config file {config_file}: {e}")
        except OSError as e:
            raise ConfigurationError(f"Error reading config file {config_file}: {e}")

        self.config_path = config_file
        self.validator.validate(self.config_data)
        self._set_defaults()

        return self.config_data

    def _find_config_file(self) -> str:
        """Find configuration file in default locations.

        Raises:
            ConfigurationError: If no config file is found.
        """
        if self.config_path:
            if os.path.exists(self.config_path):
                return self.config_path
            raise ConfigurationError(f"Config file not found: {self.config_path}")

        for location in self.DEFAULT_CONFIG_LOCATIONS:
            if os.path.exists(location):
                return location

        raise ConfigurationError(
            "Configuration file not found in any of these locations:\n" +
            "\n".join(f"  - {loc}" for loc in self.DEFAULT_CONFIG_LOCATIONS) +
            "\n\nPlease copy config.example.yaml to config.yaml and customize it."
        )

    def _set_defaults(self):
        """Set default values for optional configuration parameters."""
        defaults = {
            'run': {
                'templates': 'best-of-8',
                'parallelism': 4,
                'k': 1,
                'closure_depth': None,
                'negative_count': 1896,
                'negative_seed': 0,
            },
            'backends': {},
            'splits': self.DEFAULT_SPLITS,
            'paths': {
                'cache_dir': './cache',
                'output_dir': './outputs',
                'synonyms_dir': None,
            },
            'logging': {
                'level': 'INFO',
                'file': None,
            },
        }

        for section, section_defaults in defaults.items():
            if self.config_data.get(section) is None:
                self.config_data[section] = {}
            for key, value in section_defaults.items():
                if key not in self.config_data[section]:
                    self.config_data[section][key] = copy.deepcopy(value)

    def apply_overrides(self, section: str, overrides: Mapping[str, Any]) -> None:
        """Overlay command-line values on a section. ``None`` values are ignored."""
        target = self.config_data.setdefault(section, {})
        for key, value in overrides.items():
            if value is not None:
                target[key] = value

    def get_run_config(self) -> RunConfig:
        """Assemble the RunConfig from the ``run`` section and the other sections.

        Raises:
            ConfigurationError: If the run section is incomplete or refers to an
                unknown backend.
        """
        run = self.config_data.get('run') or {}
        self.validator.validate_run(run, self.config_data.get('backends') or {})
        task, source = Task(run['task']), SourceId(run['source'])
        templates = run.get('templates', 'best-of-8')
        paths = self.get_paths_config()
        return RunConfig(
            run_id=str(run['run_id']),
            task=task,
            source_id=source,
            model_family=ModelFamily(run['model_family']),
            backend_id=run['backend'],
            templates=templates if isinstance(templates, str) else tuple(templates),
            split=self.get_split_config(task, source),
            cache_dir=str(paths['cache_dir']),
            output_dir=str(paths['output_dir']),
            parallelism=run.get('parallelism', 4),
            k=run.get('k', 1),
            closure_depth=run.get('closure_depth'),
            negative_count=run.get('negative_count', 1896),
            negative_seed=run.get('negative_seed', 0),
        )

    def get_sources_config(self) -> Dict[str, Any]:
        return self.config_data.get('sources', {})

    def get_source_config(self, source_id: str) -> Dict[str, Any]:
        """Get the file paths configured for one source.

        The UMLS subontologies share the ``umls`` block.
        """
        source_id = SourceId(source_id)
        section = 'umls' if source_id in UMLS_SUBONTOLOGIES else source_id.value
        return self.get_sources_config().get(section) or {}

    def get_backend_config(self, backend_id: str) -> BackendConfig:
        """Get a backend configuration.

        Raises:
            ConfigurationError: If no backend of that name is configured.
        """
        backend = (self.config_data.get('backends') or {}).get(backend_id)
        if backend is None:
            raise ConfigurationError(f"Unknown backend {backend_id!r}")
        fields = {key: value for key, value in backend.items() if key != 'kind'}
        fields.setdefault('model_name', backend_id)
        try:
            return BackendConfig(backend_id=backend_id, kind=BackendKind(backend['kind']), **fields)
        except TypeError as e:
            raise ConfigurationError(f"backends.{backend_id}: {e}")

    def get_split_config(self, task: str, source_id: str) -> Optional[SplitSpec]:
        """The split for a task and source: ``<task>.<source>`` first, then ``<task>``.

        Returns None when the configured value is null, meaning the source's
        own partitions are kept (or everything is scored when there are none).
        """
        task, source_id = Task(task), SourceId(source_id)
        splits = self.config_data.get('splits') or {}
        for key in (f"{task.value}.{source_id.value}", task.value):
            if key in splits:
                split = splits[key]
                if split is None:
                    return None
                return SplitSpec(test_fraction=Fraction(str(split['test_fraction'])),
                                 seed=split.get('seed', 0))
        return None

    def get_paths_config(self) -> Dict[str, Any]:
        return self.config_data.get('paths', {})

    def get_synonyms_dir(self) -> Optional[Path]:
        synonyms_dir = self.get_paths_config().get('synonyms_dir')
        return Path(synonyms_dir) if synonyms_dir else None

    def get_logging_config(self) -> Dict[str, Any]:
        """Get logging configuration.

        Returns:
            Logging configuration dictionary.
        """
        return self.config_data.get('logging', {})
