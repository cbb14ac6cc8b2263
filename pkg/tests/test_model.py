import io
import random

import pytest

from clinotate import transitions as tr
from clinotate.corpus import Mention, Span, tokenize
from clinotate.errors import (
    EmptyCorpusError,
    FormatError,
    OntologyMismatchError,
    TerminalStateError,
    VersionMismatchError,
)
from clinotate.generator import default_config, generate_synthetic
from clinotate.model import (
    Hyperparams,
    Model,
    classify_modifiers,
    decode,
    decode_score,
    featurize,
    load_model,
    predict,
    predict_document,
    prepare_sentences,
    save_model,
    train,
    word_shape,
)

from reference_perceptron import train_reference


@pytest.fixture(scope="module")
def tiny_corpus(ontology):
    records = generate_synthetic(default_config(sentence_count=120), seed=31,
                                 ontology=ontology)
    return records[:100], records[100:]


@pytest.fixture(scope="module")
def tiny_model(ontology, tiny_corpus):
    train_records, dev_records = tiny_corpus
    return train(train_records, dev_records, ontology,
                 Hyperparams(epochs=4, seed=3))


class TestFeaturize:
    def test_buffer_form_feature(self):
        state = tr.initial_state(tokenize("derrame pleural"))
        feats = featurize(state, tokenize("derrame pleural"))
        assert "buf0=derrame" in feats

    def test_deterministic(self):
        tokens = tokenize("dor lombar hoje")
        state = tr.replay(tokens, [tr.SHIFT_ACTION, tr.SHIFT_ACTION])
        assert featurize(state, tokens) == featurize(state, tokens)

    def test_emitted_top_feature(self):
        tokens = tokenize("febre")
        state = tr.replay(tokens, [tr.SHIFT_ACTION, tr.label("clinical_findings")])
        assert "emitted_top=clinical_findings" in featurize(state, tokens)

    def test_terminal_raises(self):
        with pytest.raises(TerminalStateError):
            featurize(tr.initial_state([]), [])

    def test_word_shape(self):
        assert word_shape("Abc1") == "Xxd"
        assert word_shape("ALT") == "X"
        assert word_shape("49.5") == "d.d"


class TestTraining:
    def test_deterministic_given_seed(self, ontology, tiny_corpus):
        train_records, dev_records = tiny_corpus
        hp = Hyperparams(epochs=2, seed=11)
        m1 = train(train_records, dev_records, ontology, hp)
        m2 = train(train_records, dev_records, ontology, hp)
        assert m1 == m2

    def test_alpha_zero_no_averaging_matches_reference(self, ontology, tiny_corpus):
        train_records, dev_records = tiny_corpus
        hp = Hyperparams(epochs=2, seed=13, depth_weight_alpha=0.0, averaging=False)
        trained = train(train_records[:10], dev_records, ontology, hp)
        sentences = prepare_sentences(train_records[:10], ontology)
        dev_sentences = prepare_sentences(dev_records, ontology)
        reference = train_reference(sentences, sorted(ontology.nodes),
                                    epochs=2, seed=13,
                                    dev_sentences=dev_sentences)
        assert trained.action_weights == reference

    def test_empty_corpus(self, ontology):
        with pytest.raises(EmptyCorpusError):
            train([], [], ontology, Hyperparams(epochs=1))

    def test_unknown_node_is_ontology_mismatch(self, ontology, tiny_corpus):
        from conftest import make_doc, make_record, make_set, make_mention
        doc = make_doc(text="misterio total")
        bad = make_record(doc, make_set(doc.id, "gold",
                                        [make_mention("m1", 0, 8, "not/a/node")]))
        with pytest.raises(OntologyMismatchError):
            train([bad], [], ontology, Hyperparams(epochs=1))

    def test_dev_history_reported(self, tiny_model):
        assert len(tiny_model.dev_history) == 4
        assert all(0.0 <= f1 <= 1.0 for f1 in tiny_model.dev_history)


class TestDecoding:
    def test_empty_tokens(self, tiny_model, ontology):
        assert predict(tiny_model, [], ontology) == []

    def test_random_weights_decode_soundly(self, ontology):
        rng = random.Random(5)
        node_ids = sorted(ontology.nodes)[:5]
        for trial in range(20):
            weights = {}
            for _ in range(60):
                feat = f"buf0=w{rng.randrange(8)}"
                key = rng.choice(["SHIFT", "MERGE", "POP",
                                  f"LABEL:{rng.choice(node_ids)}"])
                weights.setdefault(feat, {})[key] = rng.uniform(-2, 2)
            model = Model(action_weights=weights, modifier_weights={},
                          ontology_version=ontology.version,
                          hyperparams=Hyperparams(beam_width=rng.choice([1, 2, 4])))
            tokens = tokenize(" ".join(f"w{rng.randrange(8)}"
                                       for _ in range(rng.randint(1, 9))))
            emitted = decode(model, tokens, ontology)
            ranges = [r for r, _ in emitted]
            for i, a in enumerate(ranges):
                for b in ranges[i + 1:]:
                    overlap = a[0] < b[1] and b[0] < a[1]
                    nested = ((a[0] <= b[0] and b[1] <= a[1])
                              or (b[0] <= a[0] and a[1] <= b[1]))
                    assert not overlap or nested

    def test_beam_never_below_greedy_on_dev(self, tiny_model, ontology, tiny_corpus):
        _, dev_records = tiny_corpus
        for sent in prepare_sentences(dev_records, ontology):
            greedy = decode_score(tiny_model, sent.tokens, ontology, width=1)
            beam = decode_score(tiny_model, sent.tokens, ontology, width=4)
            assert beam >= greedy - 1e-9

    def test_trained_model_recovers_nesting(self, tiny_model, ontology, tiny_corpus):
        # pick the nested surface the model saw most often in training
        train_records, _ = tiny_corpus
        freq = {}
        for record in train_records:
            text = record.doc.text
            mentions = record.annotation_set("gold").mentions
            for outer in mentions:
                inner = [m for m in mentions
                         if outer.span.contains(m.span) and m.span != outer.span]
                if inner:
                    key = (text[outer.span.start:outer.span.end], outer.node_id,
                           inner[0].node_id,
                           inner[0].span.start - outer.span.start,
                           inner[0].span.end - outer.span.start)
                    freq[key] = freq.get(key, 0) + 1
        (surface, outer_node, inner_node, ds, de), _ = max(
            freq.items(), key=lambda kv: (kv[1], kv[0]))
        text = f"Doente com {surface} ."
        base = len("Doente com ")
        mentions = predict_document(tiny_model, text, ontology)
        spans = {(m.span.start, m.span.end, m.node_id) for m in mentions}
        assert (base, base + len(surface), outer_node) in spans
        assert (base + ds, base + de, inner_node) in spans

    def test_version_mismatch(self, tiny_model, ontology):
        import dataclasses
        stale = dataclasses.replace(tiny_model, ontology_version="other-1")
        with pytest.raises(OntologyMismatchError):
            predict(stale, tokenize("febre"), ontology)

    def test_multi_sentence_document(self, tiny_model, ontology):
        text = "Nega febre .\nDoente refere tosse ."
        mentions = predict_document(tiny_model, text, ontology)
        surfaces = {text[m.span.start:m.span.end] for m in mentions}
        assert {"febre", "tosse"} <= surfaces
        assert [m.id for m in mentions] == [f"p{i}" for i in
                                            range(1, len(mentions) + 1)]
        for m in mentions:
            assert 0 <= m.span.start < m.span.end <= len(text)


class TestModifiers:
    def test_untrained_model_emits_nothing(self, ontology):
        empty = Model(action_weights={}, modifier_weights={},
                      ontology_version=ontology.version, hyperparams=Hyperparams())
        tokens = tokenize("sem febre")
        mention = Mention(id="m1", span=Span(4, 9), node_id="clinical_findings")
        assert classify_modifiers(empty, mention, tokens, ontology) == frozenset()

    def test_never_outside_applicable_set(self, ontology):
        # force huge positive weights on chronic for every feature
        weights = {"bias": {"chronic": 100.0}, "root=tests": {"chronic": 100.0}}
        rigged = Model(action_weights={}, modifier_weights=weights,
                       ontology_version=ontology.version, hyperparams=Hyperparams())
        tokens = tokenize("hemograma pedido")
        mention = Mention(id="m1", span=Span(0, 9), node_id="tests")
        assert "chronic" not in classify_modifiers(rigged, mention, tokens, ontology)

    def test_learned_negation(self, tiny_model, ontology):
        mentions = predict_document(tiny_model, "Nega febre .", ontology)
        febre = [m for m in mentions if m.span == Span(5, 10)]
        assert febre and "negation" in febre[0].modifier_ids


class TestPersistence:
    def test_round_trip_equality(self, tiny_model, tmp_path):
        path = tmp_path / "model.txt"
        save_model(tiny_model, path)
        loaded = load_model(path)
        assert loaded == tiny_model

    def test_bit_exact_round_trip(self, tiny_model):
        buf = io.StringIO()
        save_model(tiny_model, buf)
        first = buf.getvalue()
        buf2 = io.StringIO()
        save_model(load_model(io.StringIO(first)), buf2)
        assert buf2.getvalue() == first

    def test_truncated_file(self, tiny_model, tmp_path):
        path = tmp_path / "model.txt"
        save_model(tiny_model, path)
        content = path.read_text(encoding="utf-8").splitlines()
        path.write_text("\n".join(content[:-3]) + "\n", encoding="utf-8")
        with pytest.raises(FormatError):
            load_model(path)

    def test_not_a_model_file(self, tmp_path):
        path = tmp_path / "junk.txt"
        path.write_text("hello\nworld\n", encoding="utf-8")
        with pytest.raises(FormatError):
            load_model(path)

    def test_version_mismatch_and_force(self, tiny_model, tmp_path):
        path = tmp_path / "model.txt"
        save_model(tiny_model, path)
        with pytest.raises(VersionMismatchError):
            load_model(path, expected_ontology_version="other-7")
        forced = load_model(path, expected_ontology_version="other-7", force=True)
        assert forced.action_weights == tiny_model.action_weights
