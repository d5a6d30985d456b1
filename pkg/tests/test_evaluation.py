import random

import pytest

from ontology_harness.core.errors import ConfigurationError, IntegrityError
from ontology_harness.core.models import (AnswerSpace, EvalReport, Partition, Prediction, Provenance, RawResponse,
                                          SourceId, Task, TermTypingItem, TypePairItem)
from ontology_harness.evaluation import (ap_at_k, best_template_summary, boolean_answer_space, build_answer_space,
                                         corpus_answer_space, load_synonyms, map_at_k, map_boolean,
                                         map_ranked_term_types, map_term_type, normalize, prf1, read_reports,
                                         score_run, write_report)
from ontology_harness.ingest import parse_geonames


def prediction(item_id, *labels):
    return Prediction(item_id=item_id, ranked_labels=tuple(labels), raw_text=" ".join(labels))


@pytest.fixture
def wordnet_space():
    return build_answer_space(Task.TERM_TYPING, ["noun", "verb", "adjective", "adverb"],
                              synonyms=load_synonyms("wordnet.yaml"))


class TestNormalize:
    @pytest.mark.parametrize("raw, expected", [
        (" A Noun.", "noun"),
        ("the Parent  Class", "parent class"),
        ("**True**", "true"),
        ("The the cat", "cat"),
        ("", ""),
        (None, ""),
    ])
    def test_examples(self, raw, expected):
        assert normalize(raw) == expected

    def test_idempotent(self):
        rng = random.Random(11)
        alphabet = "aAnNtThHeE .,;!?-_'\"\t\nÉé́"
        for _ in range(1000):
            text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 20)))
            once = normalize(text)
            assert normalize(once) == once


class TestAnswerSpace:
    def test_variants_stay_disjoint(self):
        space = build_answer_space("A", ["lake", "pond"], synonyms={"lake": ["water"], "pond": ["water", "pool"]})
        assert space.labels["lake"] == {"lake", "water"}
        assert space.labels["pond"] == {"pond", "pool"}

    def test_shared_variant_is_rejected(self):
        with pytest.raises(ConfigurationError):
            AnswerSpace(task=Task.TERM_TYPING, labels={"a": frozenset({"x"}), "b": frozenset({"x"})})

    def test_label_forms(self):
        space = build_answer_space("A", ["Disease_or_Syndrome"])
        assert "disease or syndrome" in space.labels["Disease_or_Syndrome"]

    def test_boolean_space(self):
        space = boolean_answer_space()
        assert space.labels["true"] == {"true", "correct", "yes", "right", "accurate"}
        assert space.labels["false"] == {"false", "incorrect", "no", "wrong", "inaccurate"}

    def test_corpus_space_uses_display_names_and_synonyms(self, geonames_files):
        space = corpus_answer_space("A", parse_geonames(**geonames_files))
        assert set(space.labels) == {"LK", "PPL", "MT"}
        assert {"populated place", "city", "ppl"} <= space.labels["PPL"]
        assert "mountain" in space.labels["MT"]

    def test_synonyms_dir_overrides_shipped_file(self, tmp_path):
        (tmp_path / "wordnet.yaml").write_text("noun:\n  - thing word\n", encoding="utf-8")
        assert load_synonyms("wordnet.yaml", tmp_path) == {"noun": ["thing word"]}
        assert load_synonyms("missing.yaml", tmp_path) == {}


class TestMapping:
    def test_exact_and_prefix_matches(self, wordnet_space):
        assert map_term_type(" A Noun.", wordnet_space).ranked_labels == ("noun",)
        assert map_term_type("noun phrase used as subject", wordnet_space).ranked_labels == ("noun",)
        assert map_term_type("verb phrase", wordnet_space).ranked_labels == ("verb",)
        assert map_term_type("nounish", wordnet_space).ranked_labels == ()

    def test_no_match_is_empty(self, wordnet_space):
        result = map_term_type("I am not sure", wordnet_space)
        assert result.ranked_labels == ()
        assert result.top is None

    def test_ranked_tokens_keep_score_order(self, wordnet_space):
        tokens = (("Ġverb", 0.2), ("noun", 0.7), ("xyz", 0.05), ("▁nouns", 0.01))
        assert map_ranked_term_types(tokens, wordnet_space).ranked_labels == ("noun", "verb")

    @pytest.mark.parametrize("text, expected", [
        ("Yes, that is correct", ("true",)),
        ("This statement is incorrect.", ("false",)),
        ("a true statement, not false", ("true",)),
        ("Wrong!", ("false",)),
        ("unknowable", ()),
    ])
    def test_boolean_text(self, text, expected):
        assert map_boolean(text, boolean_answer_space()).ranked_labels == expected

    def test_boolean_tokens(self):
        tokens = (("maybe", 0.9), ("▁no", 0.5), ("yes", 0.4))
        assert map_boolean(tokens, boolean_answer_space()).ranked_labels == ("false",)
        assert map_boolean((("hmm", 1.0),), boolean_answer_space()).ranked_labels == ()


def brute_force_ap(gold, predicted, k):
    top = list(predicted)[:k]
    total = 0.0
    for i, label in enumerate(top):
        if label in gold:
            total += sum(1 for other in top[:i + 1] if other in gold) / (i + 1)
    return total / min(len(gold), k)


class TestMetrics:
    def test_hand_checked_map(self):
        golds = {"1": {"noun"}, "2": {"verb"}, "3": {"adverb", "adjective"}}
        predictions = [prediction("1", "noun"), prediction("2", "noun", "verb"), prediction("3", "adjective")]
        assert map_at_k(predictions, golds, 1) == pytest.approx(2 / 3)
        # at k=2 item 2 scores 1/2 and item 3 is divided by min(|gold|, k) = 2
        assert map_at_k(predictions, golds, 2) == pytest.approx((1 + 0.5 + 0.5) / 3)

    def test_map_matches_brute_force(self):
        rng = random.Random(3)
        labels = [f"t{i}" for i in range(8)]
        for _ in range(1000):
            gold = set(rng.sample(labels, rng.randint(1, 3)))
            predicted = rng.sample(labels, rng.randint(0, 6))
            k = rng.randint(1, 5)
            expected = brute_force_ap(gold, predicted, k)
            assert ap_at_k(gold, predicted, k) == pytest.approx(expected, abs=1e-12, rel=0)

    def test_mean_over_items_matches_brute_force(self):
        rng = random.Random(4)
        labels = [f"t{i}" for i in range(8)]
        for _ in range(200):
            golds = {str(i): set(rng.sample(labels, rng.randint(1, 3))) for i in range(rng.randint(1, 20))}
            predictions = [prediction(item_id, *rng.sample(labels, rng.randint(0, 6))) for item_id in golds]
            k = rng.randint(1, 5)
            expected = sum(brute_force_ap(golds[p.item_id], p.ranked_labels, k) for p in predictions) / len(predictions)
            assert map_at_k(predictions, golds, k) == pytest.approx(expected, abs=1e-12, rel=0)

    def test_prf1_matches_brute_force(self):
        rng = random.Random(5)
        for _ in range(1000):
            n = rng.randint(1, 12)
            golds = {str(i): rng.random() < 0.5 for i in range(n)}
            predictions = [prediction(str(i), *rng.choice([(), ("true",), ("false",)])) for i in range(n)]
            predicted = {p.item_id for p in predictions if p.top == "true"}
            actual = {item_id for item_id, label in golds.items() if label}
            tp = len(predicted & actual)
            precision = tp / len(predicted) if predicted else 0.0
            recall = tp / len(actual) if actual else 0.0
            f1 = 2 * precision * recall / (precision + recall) if tp else 0.0
            assert prf1(predictions, golds) == pytest.approx((precision, recall, f1), abs=1e-12, rel=0)

    def test_empty_prediction_counts_as_negative(self):
        golds = {"1": True, "2": True, "3": False, "4": False}
        predictions = [prediction("1", "true"), prediction("2"), prediction("3", "true"),
                       prediction("4", "false")]
        assert prf1(predictions, golds) == pytest.approx((0.5, 0.5, 0.5))

    def test_unknown_items(self):
        with pytest.raises(IntegrityError) as info:
            map_at_k([prediction("ghost", "noun")], {"1": {"noun"}})
        assert info.value.item_ids == ["ghost"]
        with pytest.raises(IntegrityError):
            prf1([prediction("ghost", "true")], {})

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError):
            map_at_k([], {}, 0)


TERMS = [
    TermTypingItem("wordnet:test:big.s.01", "big", frozenset({"adjective"}), SourceId.WORDNET, Partition.TEST),
    TermTypingItem("wordnet:test:cat.n.01", "cat", frozenset({"noun"}), SourceId.WORDNET, Partition.TEST),
    TermTypingItem("wordnet:test:walk.v.01", "walk", frozenset({"verb"}), SourceId.WORDNET, Partition.TEST),
    TermTypingItem("wordnet:train:dog.n.01", "dog", frozenset({"noun"}), SourceId.WORDNET, Partition.TRAIN),
]


def responses(template_id, answers):
    return [RawResponse(item_id=item.item_id, template_id=template_id, backend_id="test", text=answer)
            for item, answer in zip(TERMS, answers)]


class TestScoreRun:
    def test_scores_test_partition_per_template(self, wordnet_space):
        run = (responses("A.wordnet.seq2seq.1", ["adjective", "noun", "noun"])
               + responses("A.wordnet.seq2seq.2", ["an adjective", "Noun.", "verb"]))

        score = score_run(run, TERMS, wordnet_space, dataset_id="A.wordnet")
        first, second = score.reports
        assert (first.n_items, first.map_at_1) == (3, pytest.approx(2 / 3))
        assert second.map_at_1 == 1.0
        assert score.best.template_id == "A.wordnet.seq2seq.2"
        assert score.summary["per_dataset"]["A.wordnet"] == {"template_id": "A.wordnet.seq2seq.2", "score": 1.0}
        assert [entry.hit for entry in first.per_item] == [True, True, False]

    def test_ties_go_to_lowest_template_number(self, wordnet_space):
        run = (responses("A.wordnet.seq2seq.10", ["adjective", "noun", "verb"])
               + responses("A.wordnet.seq2seq.2", ["adjective", "noun", "verb"]))
        assert score_run(run, TERMS, wordnet_space).best.template_id == "A.wordnet.seq2seq.2"

    def test_missing_and_stray_responses(self, wordnet_space):
        with pytest.raises(IntegrityError) as info:
            score_run(responses("A.wordnet.seq2seq.1", ["adjective", "noun"]), TERMS, wordnet_space)
        assert info.value.item_ids == ["wordnet:test:walk.v.01"]

        stray = responses("A.wordnet.seq2seq.1", ["adjective", "noun", "verb", "noun"])
        with pytest.raises(IntegrityError):
            score_run(stray, TERMS, wordnet_space)

    def test_boolean_pairs(self):
        items = [TypePairItem("B-000000", "P", "PPL", True, Provenance.DIRECT),
                 TypePairItem("B-000001", "PPL", "P", False, Provenance.INVERTED)]
        run = [RawResponse(item.item_id, "B.any.seq2seq.1", "test", text="true") for item in items]

        report = score_run(run, items, boolean_answer_space()).best
        assert (report.precision, report.recall) == (0.5, 1.0)
        assert report.f1 == pytest.approx(2 / 3)
        assert [entry.hit for entry in report.per_item] == [True, False]


def test_best_template_summary_per_family():
    def report(dataset_id, template_id, score):
        return EvalReport(task=Task.TERM_TYPING, dataset_id=dataset_id, backend_id="b", template_id=template_id,
                          n_items=1, map_at_1=score)

    reports = [report("A.wordnet", "A.wordnet.masked.1", 0.2), report("A.wordnet", "A.wordnet.masked.2", 0.6),
               report("A.geonames", "A.geonames.masked.1", 0.9), report("A.geonames", "A.geonames.masked.2", 0.3)]
    summary = best_template_summary(reports)

    assert summary["per_dataset"]["A.geonames"]["template_id"] == "A.geonames.masked.1"
    assert summary["per_family"]["masked"]["template"] == 1
    assert summary["per_family"]["masked"]["mean_score"] == pytest.approx(0.55)
    assert summary["per_family"]["masked"]["datasets"] == {"A.geonames": 0.9, "A.wordnet": 0.2}


def test_report_files_keep_the_ledger(tmp_path, wordnet_space):
    score = score_run(responses("A.wordnet.seq2seq.1", ["adjective", "verb", "verb"]), TERMS, wordnet_space,
                      dataset_id="A.wordnet", backend_id="echo")
    path = write_report(score.best, tmp_path)

    assert path.name == "A.wordnet.seq2seq.1.json"
    (restored,) = read_reports(tmp_path, with_ledger=True)
    assert restored.map_at_1 == pytest.approx(2 / 3)
    assert restored.per_item == score.best.per_item
