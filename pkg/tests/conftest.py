import pytest

from clinotate.corpus import AnnotatedDocument, AnnotationSet, Document, Mention, Span
from clinotate.ontology import seed_catalog

from datetime import date


@pytest.fixture(scope="session")
def ontology():
    return seed_catalog()


def make_doc(doc_id="d1", text="sem alergias alimentares", patient="pt-001",
             day=date(2020, 3, 14), record_type="daily_note", specialty="Medicina Interna"):
    return Document(id=doc_id, patient_id=patient, date=day,
                    record_type=record_type, specialty=specialty, text=text)


def make_mention(mid, start, end, node, modifiers=(), annotator="gold"):
    return Mention(id=mid, span=Span(start, end), node_id=node,
                   modifier_ids=frozenset(modifiers), annotator_id=annotator)


def make_record(doc, *sets):
    return AnnotatedDocument(doc=doc, sets=list(sets))


def make_set(doc_id, annotator, mentions=()):
    return AnnotationSet(doc_id=doc_id, annotator_id=annotator,
                         mentions=tuple(mentions))
