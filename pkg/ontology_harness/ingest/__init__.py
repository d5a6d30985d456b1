"""Knowledge-source parsers and the shared corpus model."""

import logging
from typing import Any, Mapping

from ..core.errors import ConfigurationError
from ..core.models import SourceCorpus, SourceId, UMLS_SUBONTOLOGIES
from .corpus_io import read_corpus_jsonl, write_corpus_jsonl
from .geonames import parse_geonames
from .schemaorg import parse_schemaorg
from .taxonomy import build_taxonomy, validate_taxonomy
from .umls import load_semantic_network, parse_umls
from .wordnet import parse_wn18rr

logger = logging.getLogger(__name__)


def _require(config: Mapping[str, Any], source: str, key: str) -> Any:
    value = config.get(key)
    if not value:
        raise ConfigurationError(f"sources.{source}.{key} is required")
    return value


def load_source(source_id: SourceId, sources_config: Mapping[str, Mapping[str, Any]]) -> SourceCorpus:
    """Parse a knowledge source using the paths of the ``sources`` config section.

    The three UMLS subontologies read the ``umls`` block; ``umls`` itself
    loads only the semantic network.
    """
    source_id = SourceId(source_id)
    section = "umls" if source_id in UMLS_SUBONTOLOGIES else source_id.value
    config = sources_config.get(section) or {}
    logger.info(f"Loading source {source_id.value}")

    if source_id == SourceId.WORDNET:
        return parse_wn18rr(_require(config, section, "train_path"),
                            _require(config, section, "valid_path"),
                            _require(config, section, "test_path"),
                            config.get("definitions_path"))
    if source_id == SourceId.GEONAMES:
        return parse_geonames(_require(config, section, "features_path"),
                              _require(config, section, "country_info_path"),
                              config.get("feature_codes_path"))
    if source_id in UMLS_SUBONTOLOGIES:
        return parse_umls(_require(config, section, "mrconso_path"),
                          _require(config, section, "mrsty_path"),
                          source_id,
                          config.get("srdef_path"), config.get("srstre1_path"), config.get("srstr_path"))
    if source_id == SourceId.UMLS:
        return load_semantic_network(_require(config, section, "srdef_path"),
                                     config.get("srstre1_path"), config.get("srstr_path"))
    return parse_schemaorg(_require(config, section, "taxonomy_export_path"))


__all__ = [
    "build_taxonomy",
    "load_semantic_network",
    "load_source",
    "parse_geonames",
    "parse_schemaorg",
    "parse_umls",
    "parse_wn18rr",
    "read_corpus_jsonl",
    "validate_taxonomy",
    "write_corpus_jsonl",
]
