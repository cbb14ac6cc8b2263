"""Per-patient inverted index from ontology concepts to dated citations.

Powers the word cloud (citation counts per concept), the timeline and
concept-filtered text queries. The index is immutable after build;
rebuilds replace it wholesale, so readers see either the old or the new
index, never a partial one. Negated mentions are indexed like any other,
with their modifiers retained, so clients can render denials distinctly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date as Date

from .corpus import Span
from .errors import EmptyQueryError, FormatError, MissingMetadataError
from .ontology import descendants

INDEX_MAGIC = "clinotate-index 1"


@dataclass(frozen=True)
class Citation:
    patient_id: str
    doc_id: str
    date: Date
    record_type: str
    specialty: str
    span: Span
    node_id: str
    modifier_ids: frozenset
    surface: str

    def sort_key(self):
        return (self.date, self.doc_id, self.span.start, self.span.end, self.node_id)


@dataclass
class ConceptIndex:
    source: str                      # "gold" or "predicted"
    postings: dict = field(default_factory=dict)      # (patient, node) -> [Citation]
    doc_concepts: dict = field(default_factory=dict)  # doc_id -> set of node ids
    doc_info: dict = field(default_factory=dict)      # doc_id -> (patient_id, date)

    def citation_count(self) -> int:
        return sum(len(v) for v in self.postings.values())


def build_index(records, source: str = "gold", canonical_annotator: str = "gold",
                predictor=None) -> ConceptIndex:
    """Build the index from annotated documents.

    `source` picks where citations come from: the canonical annotator's
    gold set, or `predictor(text) -> mentions` output. Deterministic for
    a given corpus (and predictor).
    """
    if source not in ("gold", "predicted"):
        raise ValueError(f"unknown index source {source!r}")
    if source == "predicted" and predictor is None:
        raise ValueError("predicted source needs a predictor")
    index = ConceptIndex(source=source)
    for record in records:
        doc = record.doc
        if not doc.patient_id:
            raise MissingMetadataError(f"document {doc.id!r} has no patient id")
        if not doc.specialty:
            raise MissingMetadataError(f"document {doc.id!r} has no specialty")
        if source == "gold":
            aset = record.annotation_set(canonical_annotator)
            mentions = aset.mentions if aset else ()
        else:
            mentions = predictor(doc.text)
        index.doc_info[doc.id] = (doc.patient_id, doc.date)
        concepts = index.doc_concepts.setdefault(doc.id, set())
        for m in mentions:
            citation = Citation(
                patient_id=doc.patient_id, doc_id=doc.id, date=doc.date,
                record_type=doc.record_type, specialty=doc.specialty,
                span=m.span, node_id=m.node_id, modifier_ids=m.modifier_ids,
                surface=doc.text[m.span.start:m.span.end])
            index.postings.setdefault((doc.patient_id, m.node_id), []).append(citation)
            concepts.add(m.node_id)
    for citations in index.postings.values():
        citations.sort(key=Citation.sort_key)
    return index


def concept_frequencies(index: ConceptIndex, patient_id: str) -> list:
    """(node_id, display label, count) triples, descending by count.

    The display label is the node's most frequent surface form in this
    patient's citations (ties go to the lexicographically smallest), per
    the concept-based word cloud design.
    """
    rows = []
    for (pid, node_id), citations in index.postings.items():
        if pid != patient_id or not citations:
            continue
        counts = {}
        for c in citations:
            counts[c.surface] = counts.get(c.surface, 0) + 1
        label = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
        rows.append((node_id, label, len(citations)))
    rows.sort(key=lambda r: (-r[2], r[0]))
    return rows


def timeline(index: ConceptIndex, patient_id: str, node_id: str,
             ontology=None, include_descendants: bool = False) -> list:
    """Chronological citations of a concept for one patient.

    With `include_descendants`, citations of the node's descendant closure
    are merged in (requires the ontology).
    """
    node_ids = {node_id}
    if include_descendants:
        if ontology is None:
            raise ValueError("descendant closure needs the ontology")
        node_ids |= descendants(ontology, node_id)
    citations = []
    for nid in node_ids:
        citations.extend(index.postings.get((patient_id, nid), []))
    citations.sort(key=Citation.sort_key)
    return citations


def texts_with_concepts(index: ConceptIndex, patient_id: str, node_ids,
                        mode: str = "any") -> tuple:
    """(count, doc ids) of the patient's texts marking the given concepts."""
    node_ids = set(node_ids)
    if not node_ids:
        raise EmptyQueryError("node_ids must be non-empty")
    if mode not in ("any", "all"):
        raise ValueError(f"unknown query mode {mode!r}")
    hits = []
    for doc_id, concepts in index.doc_concepts.items():
        pid, date = index.doc_info[doc_id]
        if pid != patient_id:
            continue
        if mode == "any" and concepts & node_ids:
            hits.append((date, doc_id))
        elif mode == "all" and node_ids <= concepts:
            hits.append((date, doc_id))
    hits.sort()
    doc_ids = [doc_id for _, doc_id in hits]
    return len(doc_ids), doc_ids


# ---------------------------------------------------------------------------
# Persistence: header line + sorted citation records (JSON lines)

def _citation_to_dict(c: Citation) -> dict:
    return {"patient_id": c.patient_id, "doc_id": c.doc_id,
            "date": c.date.isoformat(), "record_type": c.record_type,
            "specialty": c.specialty, "start": c.span.start, "end": c.span.end,
            "node": c.node_id, "modifiers": sorted(c.modifier_ids),
            "surface": c.surface}


def save_index(index: ConceptIndex, path):
    records = []
    for (pid, node_id), citations in index.postings.items():
        for c in citations:
            records.append(((pid, node_id) + c.sort_key(), _citation_to_dict(c)))
    records.sort(key=lambda r: r[0])
    docs = sorted(
        (doc_id, pid, date.isoformat())
        for doc_id, (pid, date) in index.doc_info.items())
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"format": INDEX_MAGIC, "source": index.source,
                             "documents": [list(d) for d in docs]},
                            ensure_ascii=False, sort_keys=True) + "\n")
        for _, rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def load_index(path) -> ConceptIndex:
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"bad index header: {exc}") from exc
        if not isinstance(header, dict) or header.get("format") != INDEX_MAGIC:
            raise FormatError("not a clinotate index file")
        index = ConceptIndex(source=header.get("source", "gold"))
        for doc_id, pid, date_s in header.get("documents", []):
            index.doc_info[doc_id] = (pid, Date.fromisoformat(date_s))
            index.doc_concepts.setdefault(doc_id, set())
        for lineno, line in enumerate(fh, 2):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                citation = Citation(
                    patient_id=rec["patient_id"], doc_id=rec["doc_id"],
                    date=Date.fromisoformat(rec["date"]),
                    record_type=rec["record_type"], specialty=rec["specialty"],
                    span=Span(int(rec["start"]), int(rec["end"])),
                    node_id=rec["node"],
                    modifier_ids=frozenset(rec.get("modifiers", [])),
                    surface=rec["surface"])
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise FormatError(f"{path}:{lineno}: bad citation record: {exc}") from exc
            index.postings.setdefault(
                (citation.patient_id, citation.node_id), []).append(citation)
            index.doc_concepts.setdefault(citation.doc_id, set()).add(citation.node_id)
            index.doc_info.setdefault(citation.doc_id,
                                      (citation.patient_id, citation.date))
    for citations in index.postings.values():
        citations.sort(key=Citation.sort_key)
    return index
