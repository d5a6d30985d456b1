import json
from collections import Counter
from pathlib import Path

import pytest

from ontology_harness.core.errors import CatalogMissingError, RenderError
from ontology_harness.core.models import (ModelFamily, PromptTemplate, Provenance, RelationTripleItem, SourceId,
                                          Task, TermTypingItem, TypePairItem)
from ontology_harness.prompts import (catalog_hash, dump_catalog, find_template, load_templates, relation_phrase,
                                      render, template_catalog)

DOG = TermTypingItem("wordnet:test:dog.n.01", "dog", frozenset({"noun"}), SourceId.WORDNET,
                     context_sentence="a member of the genus Canis")
BERLIN = TermTypingItem("geonames:2950159", "Berlin", frozenset({"PPL"}), SourceId.GEONAMES)
PAIR = TypePairItem("B-000000", "P", "PPL", True, Provenance.DIRECT, a_text="city, village",
                    b_text="populated place")
TRIPLE = RelationTripleItem("C-000000", "Anatomical Structure", "location_of", "Disease or Syndrome", True)


class TestCatalogs:
    def test_catalog_sizes(self):
        templates = load_templates()
        assert len(templates) == 123
        counts = Counter(t.task for t in templates)
        assert counts == {Task.TERM_TYPING: 96, Task.TAXONOMY_DISCOVERY: 24, Task.RELATION_EXTRACTION: 3}

    @pytest.mark.parametrize("source", ["wordnet", "geonames", "nci", "medcin", "snomedct_us"])
    @pytest.mark.parametrize("family", list(ModelFamily))
    def test_term_typing_catalogs_have_eight_templates(self, source, family):
        catalog = template_catalog("A", source, family)
        assert [t.template_id.rsplit(".", 1)[1] for t in catalog] == [str(n) for n in range(1, 9)]

    def test_subontologies_share_the_umls_catalog(self):
        assert template_catalog("A", "nci", "causal") == template_catalog("A", "snomedct_us", "causal")
        assert template_catalog("A", "nci", "causal")[0].template_id == "A.umls.causal.1"

    @pytest.mark.parametrize("source", ["geonames", "umls", "schemaorg"])
    def test_taxonomy_catalog_is_shared(self, source):
        assert len(template_catalog(Task.TAXONOMY_DISCOVERY, source, ModelFamily.SEQ2SEQ)) == 8

    def test_relation_catalog_has_one_template(self):
        catalog = template_catalog("C", "umls", "causal")
        assert [t.template_id for t in catalog] == ["C.umls.causal.1"]

    @pytest.mark.parametrize("task, source, family", [
        ("B", "geonames", "causal_answer_suffix"),
        ("B", "wordnet", "seq2seq"),
        ("C", "nci", "seq2seq"),
        ("C", "umls", "causal_answer_suffix"),
    ])
    def test_missing_catalogs(self, task, source, family):
        with pytest.raises(CatalogMissingError):
            template_catalog(task, source, family)

    def test_shipped_patterns(self):
        assert find_template("A.wordnet.seq2seq.1").pattern == "{S}. {L} POS is a ?"
        assert find_template("A.wordnet.masked.1").pattern == "{S}. {L} POS is a {MASK} ."
        assert find_template("B.any.seq2seq.2").pattern == "{b} is a subclass of {a}. This statement is a"
        assert find_template("C.umls.causal.1").pattern == (
            "Identify whether the following statement is true or false: \n"
            "Statement: {h} is {r} {t}. \nThis statement is")
        assert find_template("A.umls.masked.3").domain_phrase == "in medicine"

    def test_every_masked_template_has_one_mask(self):
        for template in load_templates():
            expected = 1 if template.model_family == ModelFamily.MASKED else 0
            assert template.pattern.count("{MASK}") == expected, template.template_id

    def test_unknown_template(self):
        with pytest.raises(CatalogMissingError):
            find_template("A.wordnet.seq2seq.9")

    def test_dump_is_parseable_and_ordered(self):
        lines = dump_catalog("A", "geonames", "seq2seq").splitlines()
        records = [json.loads(line) for line in lines]
        assert [r["template_id"] for r in records] == [f"A.geonames.seq2seq.{n}" for n in range(1, 9)]
        assert records[0]["pattern"] == "{S}. {L} is a ?"

    def test_catalog_hash_is_stable(self):
        assert catalog_hash() == catalog_hash()
        assert len(catalog_hash()) == 64


class TestRender:
    def test_term_with_sentence(self):
        prompt = render(find_template("A.wordnet.seq2seq.1"), DOG)
        assert prompt.text == "a member of the genus Canis. dog POS is a ?"
        assert prompt.item_id == DOG.item_id
        assert prompt.mask_token_used is None

    def test_sentence_segment_dropped_when_absent(self):
        prompt = render(find_template("A.geonames.seq2seq.1"), BERLIN)
        assert prompt.text == "Berlin is a ?"

    def test_mask_token(self):
        prompt = render(find_template("A.wordnet.masked.1"), DOG, mask_token="<mask>")
        assert prompt.text == "a member of the genus Canis. dog POS is a <mask> ."
        assert prompt.mask_token_used == "<mask>"

    def test_pair_uses_display_names(self):
        prompt = render(find_template("B.any.seq2seq.2"), PAIR)
        assert prompt.text == "populated place is a subclass of city, village. This statement is a"

    def test_triple_relation_phrase(self):
        prompt = render(find_template("C.umls.causal.1"), TRIPLE)
        assert prompt.text == ("Identify whether the following statement is true or false: \n"
                               "Statement: Anatomical Structure is location of Disease or Syndrome. \n"
                               "This statement is")

    def test_substituted_braces_are_left_alone(self):
        item = TermTypingItem("wordnet:test:x", "{L}", frozenset({"noun"}), SourceId.WORDNET)
        assert render(find_template("A.wordnet.seq2seq.1"), item).text == "{L} POS is a ?"

    def test_unfillable_placeholders(self):
        template = PromptTemplate("A.test.seq2seq.1", Task.TERM_TYPING, "test", ModelFamily.SEQ2SEQ,
                                  "{L} {P_domain} is a ?")
        with pytest.raises(RenderError) as info:
            render(template, DOG)
        assert info.value.placeholders == ["P_domain"]

    def test_relation_phrase(self):
        assert relation_phrase("location_of") == "location of"
        assert relation_phrase("is_a") == "a"
        assert relation_phrase("co-occurs_with") == "co-occurs with"


GOLDEN_DIR = Path(__file__).parent / "golden" / "prompts"
# Fixture item each golden catalog file was rendered with, keyed by template id prefix.
GOLDEN_ITEMS = {
    "A.wordnet": DOG,
    "A.geonames": TermTypingItem("geonames:2867714", "Müggelsee", frozenset({"LK"}), SourceId.GEONAMES,
                                 context_sentence="Müggelsee is a place in Germany"),
    "A.umls": TermTypingItem("nci:A0000003", "Heart", frozenset({"Anatomical Structure"}), SourceId.NCI,
                             context_sentence="The heart pumps blood"),
    "B.any": TypePairItem("B-000000", "waterbody", "lake", True, Provenance.DIRECT),
    "C.umls": TRIPLE,
}


def golden_records():
    records = []
    for path in sorted(GOLDEN_DIR.glob("*.jsonl")):
        records.extend(json.loads(line) for line in path.read_text(encoding="utf-8").splitlines())
    return records


class TestGoldenRenders:
    @pytest.mark.parametrize("record", golden_records(),
                             ids=lambda record: f"{record['template_id']}-{record['mask_token'] or 'none'}")
    def test_render_matches_golden(self, record):
        template = find_template(record["template_id"])
        item = GOLDEN_ITEMS[record["template_id"].rsplit(".", 2)[0]]
        if record["mask_token"]:
            prompt = render(template, item, mask_token=record["mask_token"])
        else:
            prompt = render(template, item)
        assert prompt.text.encode("utf-8") == record["text"].encode("utf-8")

    def test_every_template_has_a_golden_render(self):
        covered = {record["template_id"] for record in golden_records()}
        assert covered == {template.template_id for template in load_templates()}

    def test_bart_rows_cover_the_taxonomy_masked_catalog(self):
        bart = [record["template_id"] for record in golden_records() if record["mask_token"] == "<mask>"]
        assert bart == [f"B.any.masked.{n}" for n in range(1, 9)]
