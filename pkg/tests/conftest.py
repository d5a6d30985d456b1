"""Shared fixtures: small synthetic knowledge-source files and harness configs."""

import logging
from pathlib import Path
from typing import Dict, List

import pytest
import yaml

from ontology_harness.config.config_manager import ConfigManager

WORDNET_TRAIN = [
    ("dog.n.01", "_hypernym", "canine.n.02"),
    ("run.v.01", "_verb_group", "sprint.v.01"),
    ("quickly.r.01", "_derivationally_related_form", "quick.a.01"),
]
WORDNET_VALID = [
    ("cat.n.01", "_hypernym", "feline.n.01"),
]
WORDNET_TEST = [
    ("big.s.01", "_similar_to", "large.a.01"),
    ("walk.v.01", "_hypernym", "move.v.02"),
]

# (geonameid, name, feature class, feature code, country code)
GEONAMES_ROWS = [
    ("2950159", "Berlin", "P", "PPL", "DE"),
    ("2867714", "Müggelsee", "H", "LK", "DE"),
    ("2803993", "Zugspitze", "T", "MT", "DE"),
    ("9999001", "Nowhere", "P", "PPL", "XX"),
    ("9999002", "", "P", "PPL", "DE"),
    ("9999003", "Oddity", "Z", "ZZZ", "DE"),
]
GEONAMES_FEATURE_CODES = [
    ("H.LK", "lake", "a large inland body of standing water"),
    ("P.PPL", "populated place", "a city, town, village, or other agglomeration of buildings"),
    ("T.MT", "mountain", "an elevation standing high above the surrounding area"),
]

# Semantic types: (UI, name, tree number)
UMLS_TYPES = [
    ("T071", "Entity", "A"),
    ("T072", "Physical Object", "A1"),
    ("T001", "Organism", "A1.1"),
    ("T017", "Anatomical Structure", "A1.2"),
    ("T051", "Event", "B"),
    ("T052", "Activity", "B1"),
    ("T067", "Phenomenon or Process", "B2"),
    ("T047", "Disease or Syndrome", "B2.1"),
]
UMLS_RELATIONS = [
    ("T186", "isa", "H"),
    ("T151", "affects", "R3.1"),
    ("T152", "location_of", "R1.1"),
]
# (head UI, relation UI, tail UI) rows of the inherited relation structure
UMLS_STRUCTURE = [
    ("T001", "T186", "T072"),
    ("T047", "T151", "T001"),
    ("T017", "T152", "T047"),
    ("T052", "T151", "T001"),
]
# (CUI, AUI, source vocabulary, string, language)
UMLS_ATOMS = [
    ("C0000001", "A0000001", "NCI", "Influenza", "ENG"),
    ("C0000002", "A0000002", "NCI", "Escherichia coli", "ENG"),
    ("C0000003", "A0000003", "NCI", "Heart", "ENG"),
    ("C0000001", "A0000004", "NCI", "Influenza", "ENG"),
    ("C0000003", "A0000005", "MEDCIN", "Heart", "ENG"),
    ("C0000001", "A0000006", "NCI", "Grippe", "FRE"),
    ("C0000009", "A0000007", "NCI", "Mystery", "ENG"),
    ("C0000002", "A0000008", "SNOMEDCT_US", "Escherichia coli", "ENG"),
    ("C0000003", "A0000009", "SNOMEDCT_US", "Heart structure", "ENG"),
    ("C0000001", "A0000010", "MEDCIN", "Flu", "ENG"),
]
UMLS_SEMANTIC_TYPES = [
    ("C0000001", "T047", "B2.1", "Disease or Syndrome"),
    ("C0000002", "T001", "A1.1", "Organism"),
    ("C0000003", "T017", "A1.2", "Anatomical Structure"),
]

SCHEMAORG_CSV = (
    "id,label,subTypeOf\n"
    "https://schema.org/Thing,Thing,\n"
    "https://schema.org/CreativeWork,CreativeWork,https://schema.org/Thing\n"
    "https://schema.org/Article,Article,https://schema.org/CreativeWork\n"
    "https://schema.org/NewsArticle,NewsArticle,\"https://schema.org/Article, https://schema.org/CreativeWork\"\n"
    "https://schema.org/Place,Place,https://schema.org/Thing\n"
)


def _write_lines(path: Path, lines: List[str]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
    return path


def geonames_row(geoname_id: str, name: str, feature_class: str, feature_code: str, country: str) -> str:
    fields = [geoname_id, name, name, "", "52.5", "13.4", feature_class, feature_code, country]
    fields += [""] * (19 - len(fields))
    return "\t".join(fields)


def mrconso_row(cui: str, aui: str, sab: str, text: str, language: str = "ENG") -> str:
    fields = [cui, language, "P", "L0000001", "PF", "S0000001", "Y", aui, "", "", "", sab, "PT",
              "CODE1", text, "0", "N", "256"]
    return "|".join(fields) + "|"


@pytest.fixture(autouse=True)
def reset_root_logging():
    yield
    root = logging.getLogger()
    for handler in root.handlers[:]:
        root.removeHandler(handler)


@pytest.fixture
def wordnet_files(tmp_path) -> Dict[str, Path]:
    base = tmp_path / "wn18rr"
    return {
        "train_path": _write_lines(base / "train.txt", ["\t".join(row) for row in WORDNET_TRAIN]),
        "valid_path": _write_lines(base / "valid.txt", ["\t".join(row) for row in WORDNET_VALID]),
        "test_path": _write_lines(base / "test.txt", ["\t".join(row) for row in WORDNET_TEST]),
    }


@pytest.fixture
def geonames_files(tmp_path) -> Dict[str, Path]:
    base = tmp_path / "geonames"
    return {
        "features_path": _write_lines(base / "allCountries.txt",
                                      [geonames_row(*row) for row in GEONAMES_ROWS]),
        "country_info_path": _write_lines(base / "countryInfo.txt", [
            "#ISO\tISO3\tISO-Numeric\tfips\tCountry\tCapital",
            "DE\tDEU\t276\tGM\tGermany\tBerlin",
            "FR\tFRA\t250\tFR\tFrance\tParis",
        ]),
        "feature_codes_path": _write_lines(base / "featureCodes_en.txt",
                                           ["\t".join(row) for row in GEONAMES_FEATURE_CODES] + ["null\t\t"]),
    }


@pytest.fixture
def umls_files(tmp_path) -> Dict[str, Path]:
    base = tmp_path / "umls"
    srdef = [f"STY|{ui}|{name}|{tree}|definition of {name}||||||" for ui, name, tree in UMLS_TYPES]
    srdef += [f"RL|{ui}|{name}|{tree}|definition of {name}||||||" for ui, name, tree in UMLS_RELATIONS]
    return {
        "mrconso_path": _write_lines(base / "MRCONSO.RRF", [mrconso_row(*atom) for atom in UMLS_ATOMS]),
        "mrsty_path": _write_lines(base / "MRSTY.RRF",
                                   [f"{cui}|{tui}|{stn}|{name}|AT0000001|256|"
                                    for cui, tui, stn, name in UMLS_SEMANTIC_TYPES]),
        "srdef_path": _write_lines(base / "SRDEF", srdef),
        "srstre1_path": _write_lines(base / "SRSTRE1", [f"{h}|{r}|{t}|" for h, r, t in UMLS_STRUCTURE]),
    }


@pytest.fixture
def schemaorg_file(tmp_path) -> Path:
    path = tmp_path / "schemaorg" / "schemaorg-current-https-types.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(SCHEMAORG_CSV, encoding="utf-8")
    return path


@pytest.fixture
def harness_config(tmp_path, wordnet_files, geonames_files, umls_files, schemaorg_file) -> Dict:
    """A complete configuration over the synthetic sources, stub backends and one wire backend."""
    return {
        "sources": {
            "wordnet": {key: str(path) for key, path in wordnet_files.items()},
            "geonames": {key: str(path) for key, path in geonames_files.items()},
            "umls": {key: str(path) for key, path in umls_files.items()},
            "schemaorg": {"taxonomy_export_path": str(schemaorg_file)},
        },
        "backends": {
            "echo": {"kind": "stub_echo_gold"},
            "always-true": {"kind": "stub_constant", "stub_constant_text": "true"},
            "wire": {
                "kind": "completion",
                "endpoint_url": "http://llm.test/v1",
                "model_name": "test-model",
                "max_retries": 0,
                "backoff_seconds": 0,
            },
        },
        # B and C are scored on every item so constant answers give closed-form scores
        "splits": {"B": None, "C": None},
        "paths": {
            "cache_dir": str(tmp_path / "cache"),
            "output_dir": str(tmp_path / "outputs"),
        },
    }


@pytest.fixture
def config_manager(harness_config) -> ConfigManager:
    return ConfigManager.from_dict(harness_config)


@pytest.fixture
def config_file(tmp_path, harness_config) -> Path:
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(harness_config, sort_keys=False), encoding="utf-8")
    return path


@pytest.fixture
def configure_run(config_manager):
    """Set the run section of ``config_manager`` and return the resulting RunConfig."""

    def configure(run_id: str, task: str, source: str, backend: str, family: str = "seq2seq", **extra):
        config_manager.apply_overrides("run", {"run_id": run_id, "task": task, "source": source,
                                               "model_family": family, "backend": backend,
                                               "parallelism": 1, **extra})
        return config_manager.get_run_config()

    return configure
