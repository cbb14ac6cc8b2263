"""End-to-end acceptance suite.

One test per criterion, each printing a PASS line with the measured
numbers (run with `pytest -s` to see them on success). Random checks use
fixed seeds, so the whole suite is reproducible.
"""

import hashlib
import json
import random
import time
from datetime import date

import jsonschema
import pytest
from fastapi.testclient import TestClient

from clinotate import transitions as tr
from clinotate.agreement import pairwise_agreement
from clinotate.corpus import (
    add_mention,
    AnnotationSet,
    save_corpus,
    split_dataset,
    split_stats,
    tokenize,
)
from clinotate.errors import (
    CrossingSpanError,
    DuplicateMentionError,
    InapplicableModifierError,
    OutOfBoundsError,
)
from clinotate.evaluation import nerc_scores
from clinotate.generator import DEFAULT_LEXICON, default_config, generate_synthetic
from clinotate.index import build_index, concept_frequencies, texts_with_concepts, timeline
from clinotate.model import Hyperparams, predict_document, train
from clinotate.ontology import (
    INTERVENTION_ONLY,
    applicable_modifiers,
    seed_catalog,
    validate,
)
from clinotate.service import ServiceConfig, create_app

from conftest import make_doc, make_mention, make_record, make_set
from reference_perceptron import train_reference
from test_index import brute_frequencies, brute_texts, brute_timeline, random_corpus
from test_transitions import random_forest


def note(criterion, message):
    print(f"[criterion {criterion}] PASS - {message}")


class TestCriterion1OracleRoundTrip:
    def test_thousand_random_forests(self):
        rng = random.Random(0xC1)
        started = time.monotonic()
        n_cases = 1000
        for _ in range(n_cases):
            n = rng.randint(1, 40)
            tokens = [None] * n
            gold = random_forest(rng, n, max_depth=4)
            actions = tr.oracle_actions(tokens, gold)
            state = tr.replay(tokens, actions)
            assert state.done
            assert set(state.emitted) == {(r, nid) for r, nid in gold}
        elapsed = time.monotonic() - started
        assert elapsed < 10.0
        note(1, f"{n_cases}/{n_cases} forests replayed exactly in {elapsed:.2f}s")


class TestCriterion2OntologyGate:
    def test_seed_catalog_and_modifier_facts(self):
        ontology = seed_catalog()
        violations = validate(ontology)
        assert violations == []
        for node_id in ontology.nodes:
            assert "negation" in applicable_modifiers(ontology, node_id)
        for node_id in ontology.nodes:
            restricted = applicable_modifiers(ontology, node_id) & INTERVENTION_ONLY
            if not node_id.startswith("interventions"):
                assert not restricted, node_id
        medication = applicable_modifiers(ontology, "interventions/medication")
        assert INTERVENTION_ONLY <= medication
        assert "chronic" not in applicable_modifiers(ontology, "tests")
        note(2, "0 violations; negation universal; beginning/suspension/ongoing/past "
                "restricted to interventions; chronic inapplicable to tests")


class TestCriterion3NestingSoundness:
    @staticmethod
    def _crossing_free(ranges):
        for i, a in enumerate(ranges):
            for b in ranges[i + 1:]:
                overlap = a[0] < b[1] and b[0] < a[1]
                nested = ((a[0] <= b[0] and b[1] <= a[1])
                          or (b[0] <= a[0] and a[1] <= b[1]))
                if overlap and not nested:
                    return False
        return True

    def test_random_action_sequences_and_insertions(self, ontology):
        rng = random.Random(0xC3)
        nodes = ["n1", "n2", "n3"]
        n_walks = 8000
        for _ in range(n_walks):
            n = rng.randint(1, 10)
            state = tr.initial_state([None] * n)
            while not state.done:
                candidates = tr.valid_actions(state, nodes)
                state = tr.apply(state, candidates[rng.randrange(len(candidates))])
            assert self._crossing_free([r for r, _ in state.emitted])

        node_ids = sorted(ontology.nodes)
        n_inserts = 2500
        doc = make_doc(text="palavra " * 10)
        for _ in range(n_inserts):
            aset = make_set(doc.id, "gold")
            for k in range(6):
                start = rng.randrange(0, len(doc.text) - 2)
                end = rng.randrange(start + 1, min(len(doc.text), start + 25) + 1)
                try:
                    aset = add_mention(aset, make_mention(f"m{k}", start, end,
                                                          rng.choice(node_ids)),
                                       ontology, doc)
                except (CrossingSpanError, DuplicateMentionError,
                        OutOfBoundsError, InapplicableModifierError):
                    continue
            assert self._crossing_free(
                [(m.span.start, m.span.end) for m in aset.mentions])
        note(3, f"0 counterexamples over {n_walks} action walks "
                f"+ {n_inserts} insertion sequences")


@pytest.fixture(scope="module")
def benchmark_corpus(ontology):
    records = generate_synthetic(default_config(sentence_count=2400), seed=0xBEEF,
                                 ontology=ontology)
    return records[:2000], records[2000:2200], records[2200:2400]


class TestCriterion4LearningBenchmark:
    def test_dataset_composition(self, benchmark_corpus):
        train_r, dev_r, test_r = benchmark_corpus
        everything = train_r + dev_r + test_r
        assert (len(train_r), len(dev_r), len(test_r)) == (2000, 200, 200)
        assert sum(len(v) for v in DEFAULT_LEXICON.values()) >= 150
        nested = sum(
            1 for r in everything
            if any(a.span.contains(b.span) and a.span != b.span
                   for a in r.annotation_set("gold").mentions
                   for b in r.annotation_set("gold").mentions))
        negated = sum(
            1 for r in everything
            if any("negation" in m.modifier_ids
                   for m in r.annotation_set("gold").mentions))
        assert nested / len(everything) >= 0.20
        assert negated / len(everything) >= 0.10

    def test_f1_and_negation_accuracy(self, benchmark_corpus, ontology):
        train_r, dev_r, test_r = benchmark_corpus
        started = time.monotonic()
        model = train(train_r, dev_r, ontology, Hyperparams(epochs=5, seed=0xACCE))
        gold_map, pred_map = {}, {}
        for record in test_r:
            gold_map[record.doc.id] = list(record.annotation_set("gold").mentions)
            pred_map[record.doc.id] = predict_document(model, record.doc.text,
                                                       ontology)
        report = nerc_scores(gold_map, pred_map, ontology)
        elapsed = time.monotonic() - started
        assert report.micro.f1 >= 0.90, report.micro
        negation_accuracy = report.per_modifier_accuracy.get("negation", 0.0)
        assert negation_accuracy >= 0.90
        assert elapsed <= 300.0
        note(4, f"test micro-F1 {report.micro.f1:.4f}, negation accuracy "
                f"{negation_accuracy:.4f}, train+eval {elapsed:.1f}s "
                f"(dev history {['%.3f' % f for f in model.dev_history]})")


class TestCriterion5LossWeighting:
    @pytest.fixture(scope="class")
    def fixture_50(self, ontology):
        return generate_synthetic(default_config(sentence_count=60), seed=0x50,
                                  ontology=ontology)

    def test_alpha_zero_bit_matches_reference(self, fixture_50, ontology):
        from clinotate.model import prepare_sentences

        train_r, dev_r = fixture_50[:50], fixture_50[50:]
        hp = Hyperparams(epochs=3, seed=0x17, depth_weight_alpha=0.0,
                         averaging=False)
        trained = train(train_r, dev_r, ontology, hp)
        reference = train_reference(
            prepare_sentences(train_r, ontology), sorted(ontology.nodes),
            epochs=3, seed=0x17,
            dev_sentences=prepare_sentences(dev_r, ontology))
        assert trained.action_weights == reference
        note(5, "alpha=0/no-averaging training bit-matches the plain "
                "perceptron reference on the 50-sentence fixture")

    def test_default_alpha_reports_per_depth(self, fixture_50, ontology):
        train_r, dev_r = fixture_50[:50], fixture_50[50:]
        model = train(train_r, dev_r, ontology,
                      Hyperparams(epochs=3, seed=0x17, depth_weight_alpha=0.5))
        gold_map, pred_map = {}, {}
        for record in train_r:
            gold_map[record.doc.id] = list(record.annotation_set("gold").mentions)
            pred_map[record.doc.id] = predict_document(model, record.doc.text,
                                                       ontology)
        report = nerc_scores(gold_map, pred_map, ontology)
        assert report.by_depth  # per-depth breakdown populated
        assert 0 in report.by_depth
        depths = {d: round(prf.f1, 3) for d, prf in report.by_depth.items()}
        note(5, f"default alpha run completed; per-depth F1 {depths}")


class TestCriterion6IndexOracle:
    def test_queries_match_linear_scan(self):
        rng = random.Random(0xC6)
        nodes = ["pathological_conditions/degenerative/scleroderma", "tests",
                 "interventions/medication", "clinical_findings"]
        n_queries = 0
        while n_queries < 200:
            records = random_corpus(rng, n_docs=rng.randint(1, 50))
            idx = build_index(records)
            for _ in range(12):
                patient = f"pt-{rng.randrange(5)}"
                assert concept_frequencies(idx, patient) == \
                    brute_frequencies(records, patient)
                node = rng.choice(nodes)
                got = [(c.date, c.doc_id, c.span.start, c.span.end)
                       for c in timeline(idx, patient, node)]
                assert got == brute_timeline(records, patient, node)
                query_nodes = set(rng.sample(nodes, rng.randint(1, 3)))
                mode = rng.choice(["any", "all"])
                count, doc_ids = texts_with_concepts(idx, patient, query_nodes, mode)
                expected = brute_texts(records, patient, query_nodes, mode)
                assert doc_ids == expected and count == len(expected)
                n_queries += 3
        note(6, f"{n_queries} randomized queries equal the linear-scan oracle")


class TestCriterion7SplitShape:
    def test_3000_documents(self, ontology):
        records = generate_synthetic(default_config(sentence_count=3000),
                                     seed=0xC7, ontology=ontology)
        first = split_dataset(records, seed=7)
        second = split_dataset(records, seed=7)
        sizes = tuple(len(part) for part in first)
        assert sizes == (2697, 156, 147)
        assert [[r.doc.id for r in part] for part in first] == \
               [[r.doc.id for r in part] for part in second]
        rows = split_stats(*first)
        assert [row["set"] for row in rows] == ["Train", "Dev", "Test"]
        for row in rows:
            assert set(row) == {"set", "documents", "vocabulary", "sentences"}
        note(7, f"3000 documents split into {sizes[0]}/{sizes[1]}/{sizes[2]}, "
                "bit-identical across runs, stats rows Train/Dev/Test with "
                "documents/vocabulary/sentences")


class TestCriterion8Agreement:
    def test_fixtures_and_mode_ordering(self, ontology):
        mentions = [make_mention(f"m{i}", i * 10, i * 10 + 4, "tests")
                    for i in range(4)]
        identical = pairwise_agreement(make_set("d1", "a", mentions),
                                       make_set("d1", "b", mentions), "exact")
        assert identical == (1.0, 1.0, 1.0)

        shared = mentions[:2]
        a = make_set("d1", "a", shared + [make_mention("a2", 100, 104, "devices"),
                                          make_mention("a3", 110, 114, "time")])
        b = make_set("d1", "b", shared + [make_mention("b2", 120, 124, "devices"),
                                          make_mention("b3", 130, 134, "time")])
        half = pairwise_agreement(a, b, "exact")
        assert half == (0.5, 0.5, 0.5)

        from test_agreement import random_set
        rng = random.Random(0xC8)
        for _ in range(100):
            x = random_set(rng, "d1", "a")
            y = random_set(rng, "d1", "b")
            f_exact = pairwise_agreement(x, y, "exact")[2]
            f_relaxed = pairwise_agreement(x, y, "relaxed")[2]
            assert f_exact <= f_relaxed + 1e-12
        note(8, "identity F1=1.0; half-overlap F1=0.5 exactly; "
                "exact <= relaxed on 100 random pairs")


class TestCriterion9ApiContract:
    def test_contract(self, tmp_path):
        from importlib import resources

        schemas = json.loads(resources.files("clinotate.data")
                             .joinpath("api_schema.json").read_text())

        def check(payload, name):
            schema = dict(schemas[name])
            schema["$defs"] = schemas["$defs"]
            jsonschema.validate(payload, schema)

        sclero = "pathological_conditions/degenerative/scleroderma"
        records = []
        for d in range(3):
            doc = make_doc(doc_id=f"d{d}", text="Esclerodermia referida hoje",
                           patient="pt-1", day=date(2021, 1, d + 1))
            records.append(make_record(doc, make_set(doc.id, "gold", [
                make_mention("m1", 0, 13, sclero)])))
        free = make_doc(doc_id="d-free", patient="pt-2",
                        text="sem alergias alimentares . hemograma pedido",
                        day=date(2021, 2, 2))
        records.append(make_record(free, make_set(free.id, "gold")))
        crossing_doc = make_doc(doc_id="d-x", patient="pt-1",
                                text="dor lombar referida", day=date(2021, 3, 1))
        records.append(make_record(crossing_doc, make_set(crossing_doc.id, "gold", [
            make_mention("m1", 0, 10, "clinical_findings/symptoms_signs")])))
        store = tmp_path / "store.jsonl"
        save_corpus(records, store)

        client = TestClient(create_app(ServiceConfig(corpus_path=str(store))),
                            raise_server_exceptions=False)

        check(client.get("/catalog").json(), "catalog")
        check(client.get("/patients/pt-1/concepts").json(), "concepts")
        check(client.get("/patients/pt-1/timeline",
                         params={"node": sclero}).json(), "timeline")
        check(client.get("/patients/pt-1/texts",
                         params={"nodes": sclero}).json(), "texts")
        check(client.get("/documents/d0").json(), "document")
        check(client.post("/admin/reindex").json(), "reindex")
        created = client.post("/documents/d-free/annotations",
                              json={"start": 4, "end": 24,
                                    "node": "pathological_conditions",
                                    "modifiers": ["negation"]})
        assert created.status_code == 201
        check(created.json(), "mention_created")
        check(client.post("/predict", json={"text": "x"}).json(), "error")

        def hash_store():
            return hashlib.sha256(store.read_bytes()).hexdigest()

        before = hash_store()
        crossing = client.post("/documents/d-x/annotations",
                               json={"start": 4, "end": 19,
                                     "node": "anatomic_structure",
                                     "modifiers": []})
        assert crossing.status_code == 422
        assert crossing.json()["error"] == "CrossingSpan"
        check(crossing.json(), "error")
        assert hash_store() == before

        chronic = client.post("/documents/d-free/annotations",
                              json={"start": 27, "end": 36, "node": "tests",
                                    "modifiers": ["chronic"]})
        assert chronic.status_code == 422
        assert chronic.json()["error"] == "InapplicableModifier"
        assert hash_store() == before
        note(9, "endpoint payloads validate against published schemas; "
                "CrossingSpan/InapplicableModifier POSTs return 422 and leave "
                "the store hash unchanged")
