"""WN18RR ingestion for term typing over WordNet parts of speech."""

import logging
import re
from collections import Counter
from pathlib import Path
from typing import Dict, Optional, Tuple

from ..core.errors import ParseError
from ..core.models import Partition, SourceCorpus, SourceId
from .common import PathLike, RecordMerger, inventory_of, log_warnings, nfc, require_file

logger = logging.getLogger(__name__)

WORDNET_TYPES = ("noun", "verb", "adverb", "adjective")

# Synset-style ids such as dog.n.01; satellite adjectives (.s) fold into adjective.
SYNSET_ID = re.compile(r"^(?P<lemma>.+)\.(?P<pos>[nvasr])\.(?P<sense>\d+)$")
SYNSET_POS = {"n": "noun", "v": "verb", "a": "adjective", "s": "adjective", "r": "adverb"}

# Definition-file names such as __dog_NN_1
DEFINITION_NAME = re.compile(r"^__(?P<lemma>.+)_(?P<tag>NN|VB|JJ|RB)_(?P<sense>\d+)$")
DEFINITION_POS = {"NN": "noun", "VB": "verb", "JJ": "adjective", "RB": "adverb"}


def _surface(lemma: str) -> str:
    return nfc(lemma.replace("_", " ").strip())


def load_definitions(definitions_path: PathLike) -> Dict[str, Tuple[str, str, str]]:
    """Read ``wordnet-mlj12-definitions.txt`` into offset -> (surface, pos, gloss)."""
    path = require_file(definitions_path, "WN18RR definitions file")
    definitions: Dict[str, Tuple[str, str, str]] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) < 2:
                raise ParseError("expected offset, name and gloss columns", str(path), line_number)
            match = DEFINITION_NAME.match(fields[1])
            if not match:
                raise ParseError(f"unrecognised synset name '{fields[1]}'", str(path), line_number)
            gloss = nfc(fields[2].strip()) if len(fields) > 2 else ""
            definitions[fields[0]] = (_surface(match.group("lemma")),
                                      DEFINITION_POS[match.group("tag")], gloss)
    return definitions


def decode_entity(entity: str, definitions: Optional[Dict[str, Tuple[str, str, str]]] = None
                  ) -> Optional[Tuple[str, str, Optional[str]]]:
    """Decode a WN18RR entity id into (surface form, part of speech, gloss).

    Synset-style ids are decoded directly; numeric offsets need the
    definitions file. Returns None when the id cannot be decoded.
    """
    match = SYNSET_ID.match(entity)
    if match:
        return _surface(match.group("lemma")), SYNSET_POS[match.group("pos")], None
    if definitions and entity in definitions:
        surface, pos, gloss = definitions[entity]
        return surface, pos, gloss or None
    return None


def parse_wn18rr(train_path: PathLike, valid_path: PathLike, test_path: PathLike,
                 definitions_path: Optional[PathLike] = None) -> SourceCorpus:
    """Parse the WN18RR triple files into a part-of-speech typed corpus.

    Both entities of every triple are terms. Train triples populate the train
    partition; validation and test triples together form the test partition.

    Args:
        train_path: ``train.txt`` of the WN18RR distribution.
        valid_path: ``valid.txt``.
        test_path: ``test.txt``.
        definitions_path: Optional definitions file; needed for numeric
            synset offsets and the source of glosses used as context sentences.

    Returns:
        The WordNet corpus with 4 part-of-speech types.

    Raises:
        SourceUnavailableError: If a file is missing.
        ParseError: On malformed lines, undecodable entities or empty input.
    """
    definitions = load_definitions(definitions_path) if definitions_path else None
    merger = RecordMerger(SourceId.WORDNET)
    warnings: Counter = Counter()

    splits = ((train_path, Partition.TRAIN), (valid_path, Partition.TEST), (test_path, Partition.TEST))
    for raw_path, partition in splits:
        path = require_file(raw_path, "WN18RR split file")
        logger.info(f"Parsing WN18RR {partition.value} triples from {path}")
        with open(path, "r", encoding="utf-8") as handle:
            for line_number, line in enumerate(handle, 1):
                line = line.rstrip("\r\n")
                if not line.strip():
                    continue
                fields = line.split("\t")
                if len(fields) != 3:
                    raise ParseError(f"expected 3 tab-separated fields, found {len(fields)}",
                                     str(path), line_number)
                for entity in (fields[0].strip(), fields[2].strip()):
                    decoded = decode_entity(entity, definitions)
                    if decoded is None:
                        raise ParseError(f"cannot decode entity '{entity}'", str(path), line_number)
                    surface, pos, gloss = decoded
                    if not surface:
                        warnings["empty_surface_forms"] += 1
                        continue
                    merger.add(entity, surface, (pos,), context_sentence=gloss, partition=partition)

    if not len(merger):
        raise ParseError("no records", str(Path(train_path)))

    records = merger.records()
    corpus = SourceCorpus(
        source_id=SourceId.WORDNET,
        records=records,
        type_inventory=inventory_of(records),
        warnings=log_warnings("wordnet", warnings),
    )
    logger.info(f"WordNet corpus: {corpus.partition_counts()}, {len(corpus.type_inventory)} types")
    return corpus
