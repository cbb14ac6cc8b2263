"""Golden-value checks pinning the documented file formats."""

import json
from datetime import date

from clinotate.corpus import dumps_record, loads_record
from clinotate.index import INDEX_MAGIC, build_index, load_index, save_index
from clinotate.model import MODEL_MAGIC, Hyperparams, Model, load_model, save_model

from conftest import make_doc, make_mention, make_record, make_set

CORPUS_LINE = (
    '{"annotations": [{"annotator_id": "gold", "mentions": '
    '[{"end": 24, "id": "m1", "modifiers": ["negation"], "node": '
    '"pathological_conditions", "start": 4}]}], '
    '"doc": {"date": "2020-03-14", "id": "d1", "patient_id": "pt-001", '
    '"record_type": "daily_note", "specialty": "Medicina Interna", '
    '"text": "sem alergias alimentares"}}'
)


class TestCorpusLine:
    def test_documented_shape_parses(self):
        record = loads_record(CORPUS_LINE)
        assert record.doc.id == "d1"
        assert record.doc.date == date(2020, 3, 14)
        mention = record.sets[0].mentions[0]
        assert (mention.span.start, mention.span.end) == (4, 24)
        assert mention.modifier_ids == frozenset({"negation"})

    def test_serialization_is_canonical(self):
        record = loads_record(CORPUS_LINE)
        assert dumps_record(record) == CORPUS_LINE
        assert json.loads(dumps_record(record)) == json.loads(CORPUS_LINE)


class TestModelFile:
    def test_header_lines(self, tmp_path, ontology):
        model = Model(action_weights={"bias": {"SHIFT": 1.5}},
                      modifier_weights={"l1=sem": {"negation": 2.0}},
                      ontology_version=ontology.version,
                      hyperparams=Hyperparams())
        path = tmp_path / "m.txt"
        save_model(model, path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == MODEL_MAGIC
        assert lines[1] == f"ontology_version {ontology.version}"
        assert lines[2].startswith("hyperparams {")
        assert lines[3] == "counts 1 1"
        assert lines[4] == "A\tbias\tSHIFT\t1.5"
        assert lines[5] == "M\tl1=sem\tnegation\t2.0"
        assert load_model(path) == model


class TestIndexFile:
    def test_header_and_round_trip(self, tmp_path):
        doc = make_doc(text="Esclerodermia hoje")
        record = make_record(doc, make_set(doc.id, "gold", [
            make_mention("m1", 0, 13,
                         "pathological_conditions/degenerative/scleroderma")]))
        idx = build_index([record])
        path = tmp_path / "i.jsonl"
        save_index(idx, path)
        header = json.loads(path.read_text(encoding="utf-8").splitlines()[0])
        assert header["format"] == INDEX_MAGIC
        assert header["source"] == "gold"
        assert load_index(path) == idx
