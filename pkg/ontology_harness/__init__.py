"""
Ontology Harness - ontology-learning task datasets and language model evaluation.

This package turns knowledge sources (WordNet, GeoNames, UMLS, schema.org) into
term typing, taxonomy discovery and relation extraction datasets, prompts model
backends with per-family template catalogs, and scores their answers.
"""

__version__ = "1.0.0"

from .config.config_manager import ConfigManager
from .core.runner import HarnessRunner

__all__ = ["ConfigManager", "HarnessRunner", "__version__"]
