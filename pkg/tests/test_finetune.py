import json

import pytest

from ontology_harness.core.errors import CapacityError
from ontology_harness.core.finetune import default_tasks, export_finetune_samples, select_shots, training_items
from ontology_harness.core.models import Partition, Provenance, SourceId, Task, TermTypingItem, TypePairItem

SOURCES = [SourceId.WORDNET, SourceId.GEONAMES, SourceId.NCI, SourceId.MEDCIN]


def terms(source, count=20, types=("noun",), held_out=5):
    return [TermTypingItem(f"{source.value}:{i:03d}", f"unseen {i}" if i < held_out else f"term {i}",
                           frozenset(types), source, Partition.TEST if i < held_out else Partition.TRAIN)
            for i in range(count)]


def read_lines(path):
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()]


def test_zero_shots_writes_header_only(tmp_path):
    path = tmp_path / "shots.jsonl"
    assert export_finetune_samples({(Task.TERM_TYPING, SourceId.WORDNET): terms(SourceId.WORDNET)}, path,
                                   shots_per_source=0) == 0
    (header,) = read_lines(path)
    assert header["manifest"]["records"] == 0
    assert header["manifest"]["datasets"] == ["A.wordnet"]


def test_shots_per_source(tmp_path):
    samples = {(Task.TERM_TYPING, source): terms(source) for source in SOURCES}
    path = tmp_path / "shots.jsonl"

    assert export_finetune_samples(samples, path, shots_per_source=8, seed=3) == 32
    header, *records = read_lines(path)
    assert header["manifest"]["seed"] == 3
    assert len(records) == 32
    for source in SOURCES:
        mine = [r for r in records if r["source"] == source.value]
        assert len(mine) == 8
        assert [int(r["template_id"].rsplit(".", 1)[1]) for r in mine] == list(range(1, 9))
    assert {r["target"] for r in records} == {"noun"}
    assert all("term" in r["instruction"] for r in records)


def test_only_training_items_are_sampled(tmp_path):
    items = terms(SourceId.WORDNET, count=12, held_out=4)
    path = tmp_path / "shots.jsonl"
    export_finetune_samples({(Task.TERM_TYPING, SourceId.WORDNET): items}, path, shots_per_source=8)

    instructions = [r["instruction"] for r in read_lines(path)[1:]]
    assert len(instructions) == 8
    assert not any("unseen" in text for text in instructions)


def test_same_seed_same_bytes(tmp_path):
    samples = {(Task.TERM_TYPING, source): terms(source) for source in SOURCES}
    export_finetune_samples(samples, tmp_path / "a.jsonl", shots_per_source=4, seed=9)
    export_finetune_samples(samples, tmp_path / "b.jsonl", shots_per_source=4, seed=9)
    export_finetune_samples(samples, tmp_path / "c.jsonl", shots_per_source=4, seed=10)

    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
    assert (tmp_path / "a.jsonl").read_bytes() != (tmp_path / "c.jsonl").read_bytes()


def test_not_enough_training_items():
    pool = training_items(terms(SourceId.WORDNET, count=6, held_out=2))
    with pytest.raises(CapacityError) as info:
        select_shots(pool, 5, 0, (Task.TERM_TYPING, SourceId.WORDNET))
    assert info.value.maximum == 4


def test_unsplit_items_are_all_training():
    items = [TermTypingItem(f"schemaorg:{i}", f"t{i}", frozenset({"Thing"}), SourceId.SCHEMAORG)
             for i in range(3)]
    assert training_items(items) == items


def test_restrict_types(tmp_path):
    pairs = [TypePairItem("B-000000", "P", "PPL", True, Provenance.DIRECT),
             TypePairItem("B-000001", "PPL", "P", False, Provenance.INVERTED),
             TypePairItem("B-000002", "H", "LK", True, Provenance.DIRECT),
             TypePairItem("B-000003", "LK", "H", False, Provenance.INVERTED)]
    samples = {
        (Task.TAXONOMY_DISCOVERY, SourceId.GEONAMES): pairs,
        (Task.TERM_TYPING, SourceId.GEONAMES): terms(SourceId.GEONAMES, types=("P", "PPL")),
    }
    path = tmp_path / "shots.jsonl"

    assert export_finetune_samples(samples, path, shots_per_source=2, restrict_types=True) == 4
    records = read_lines(path)[1:]
    assert [r["task"] for r in records] == ["A", "A", "B", "B"]
    assert {r["target"] for r in records if r["task"] == "B"} == {"true", "false"}
    assert all("LK" not in r["instruction"] for r in records)

    with pytest.raises(CapacityError):
        export_finetune_samples(samples, path, shots_per_source=3, restrict_types=True)


def test_negative_shots(tmp_path):
    with pytest.raises(ValueError):
        export_finetune_samples({}, tmp_path / "x.jsonl", shots_per_source=-1)


@pytest.mark.parametrize("source, tasks, expected", [
    (SourceId.WORDNET, None, [Task.TERM_TYPING]),
    (SourceId.SCHEMAORG, None, []),
    (SourceId.GEONAMES, ["A", "B"], [Task.TERM_TYPING, Task.TAXONOMY_DISCOVERY]),
    (SourceId.UMLS, ["B", "C"], [Task.TAXONOMY_DISCOVERY, Task.RELATION_EXTRACTION]),
    (SourceId.NCI, ["A", "B", "C"], [Task.TERM_TYPING]),
])
def test_default_tasks(source, tasks, expected):
    assert default_tasks(source, tasks) == expected
