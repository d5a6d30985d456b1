"""GeoNames ingestion: place names typed by feature code."""

import logging
from collections import Counter
from typing import Dict, Optional, Tuple

from tqdm import tqdm

from ..core.errors import ParseError
from ..core.models import SourceCorpus, SourceId
from .common import PathLike, RecordMerger, log_warnings, nfc, require_file
from .taxonomy import build_taxonomy

logger = logging.getLogger(__name__)

# Column offsets in allCountries.txt / <CC>.txt
GEONAME_ID = 0
NAME = 1
FEATURE_CLASS = 6
FEATURE_CODE = 7
COUNTRY_CODE = 8

# The nine top-level feature classes with their official descriptions.
GEONAMES_CLASSES: Dict[str, str] = {
    "A": "country, state, region",
    "H": "stream, lake",
    "L": "parks, area",
    "P": "city, village",
    "R": "road, railroad",
    "S": "spot, building, farm",
    "T": "mountain, hill, rock",
    "U": "undersea",
    "V": "forest, heath",
}

CONTEXT_SENTENCE = "{L} is a place in {COUNTRY}."


def load_country_names(country_info_path: PathLike) -> Dict[str, str]:
    """Read ``countryInfo.txt`` into ISO code -> country name."""
    path = require_file(country_info_path, "GeoNames country info file")
    countries: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, 1):
            if line.startswith("#") or not line.strip():
                continue
            fields = line.rstrip("\r\n").split("\t")
            if len(fields) < 5:
                raise ParseError(f"expected at least 5 columns, found {len(fields)}", str(path), line_number)
            countries[fields[0].strip()] = nfc(fields[4].strip())
    return countries


def load_feature_codes(feature_codes_path: PathLike) -> Dict[str, Tuple[str, str]]:
    """Read ``featureCodes_en.txt`` into code -> (feature class, feature name).

    Lines look like ``H.LK<TAB>lake<TAB>a large inland body of standing water``;
    the trailing ``null`` placeholder row is skipped.
    """
    path = require_file(feature_codes_path, "GeoNames feature codes file")
    codes: Dict[str, Tuple[str, str]] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, 1):
            fields = line.rstrip("\r\n").split("\t")
            if not fields[0].strip() or fields[0].strip() == "null":
                continue
            feature_class, _, code = fields[0].strip().partition(".")
            if not code or feature_class not in GEONAMES_CLASSES:
                raise ParseError(f"unrecognised feature code '{fields[0]}'", str(path), line_number)
            name = nfc(fields[1].strip()) if len(fields) > 1 else ""
            codes[code] = (feature_class, name)
    return codes


def geonames_sentence(name: str, country: str) -> str:
    return CONTEXT_SENTENCE.replace("{L}", name).replace("{COUNTRY}", country)


def parse_geonames(features_path: PathLike, country_info_path: PathLike,
                   feature_codes_path: Optional[PathLike] = None) -> SourceCorpus:
    """Parse a GeoNames dump into a corpus typed by feature code.

    The label of each record is its feature code (``LK``, ``PPL``, ...). The
    taxonomy has the nine feature classes on level 0 and every feature code
    on level 1 under its class.

    Args:
        features_path: Tab-separated GeoNames main dump.
        country_info_path: ``countryInfo.txt`` mapping ISO codes to names.
        feature_codes_path: Optional ``featureCodes_en.txt``. When given it
            fixes the code inventory and supplies display names; otherwise the
            inventory is the set of codes observed in the dump.

    Returns:
        The GeoNames corpus with its two-level taxonomy attached.

    Raises:
        SourceUnavailableError: If a file is missing.
        ParseError: On rows with too few columns or an empty dump.
    """
    countries = load_country_names(country_info_path)
    known_codes = load_feature_codes(feature_codes_path) if feature_codes_path else None
    observed_codes: Dict[str, str] = {}

    path = require_file(features_path, "GeoNames dump")
    merger = RecordMerger(SourceId.GEONAMES)
    warnings: Counter = Counter()

    logger.info(f"Parsing GeoNames dump {path}")
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(tqdm(handle, desc="geonames", unit=" rows", disable=None), 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) <= COUNTRY_CODE:
                raise ParseError(f"expected at least {COUNTRY_CODE + 1} columns, found {len(fields)}",
                                 str(path), line_number)

            name = nfc(fields[NAME].strip())
            feature_class = fields[FEATURE_CLASS].strip()
            code = fields[FEATURE_CODE].strip()
            if not name:
                warnings["rows_without_name"] += 1
                continue
            if not code or feature_class not in GEONAMES_CLASSES:
                warnings["rows_with_unknown_feature_code"] += 1
                continue
            if known_codes is not None and known_codes.get(code, (None,))[0] != feature_class:
                warnings["rows_with_unknown_feature_code"] += 1
                continue
            observed_codes.setdefault(code, feature_class)

            country = countries.get(fields[COUNTRY_CODE].strip())
            if country is None:
                warnings["rows_with_unknown_country"] += 1
            sentence = geonames_sentence(name, country) if country else None
            merger.add(fields[GEONAME_ID].strip(), name, (code,), context_sentence=sentence)

    if not len(merger):
        raise ParseError("no records", str(path))

    if known_codes is not None:
        code_classes = {code: feature_class for code, (feature_class, _) in known_codes.items()}
        names = {code: name for code, (_, name) in known_codes.items() if name}
    else:
        code_classes = observed_codes
        names = {}
    names.update(GEONAMES_CLASSES)

    collisions = sorted(set(code_classes) & set(GEONAMES_CLASSES))
    if collisions:
        raise ParseError(f"feature codes collide with class letters: {', '.join(collisions)}", str(path))

    taxonomy, _ = build_taxonomy(
        labels=list(GEONAMES_CLASSES) + list(code_classes),
        edges=code_classes.items(),
        names=names,
    )

    records = merger.records()
    corpus = SourceCorpus(
        source_id=SourceId.GEONAMES,
        records=records,
        type_inventory=frozenset(code_classes),
        taxonomy=taxonomy,
        warnings=log_warnings("geonames", warnings),
    )
    logger.info(f"GeoNames corpus: {len(records)} records, {len(corpus.type_inventory)} feature codes, "
                f"{len(taxonomy.nodes)} taxonomy nodes")
    return corpus
