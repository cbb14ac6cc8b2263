"""HTTP JSON API over the corpus store, catalog, model and concept index.

Single-node, file-backed service. Reads run against immutable snapshots;
writes are serialized by a lock and persisted atomically (temp file +
rename), so a failed write leaves the store byte-identical. The concept
index is rebuilt explicitly via POST /admin/reindex and swapped
atomically.
"""

from __future__ import annotations

import os
import tempfile
import threading
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from . import corpus as corpus_mod
from . import index as index_mod
from . import model as model_mod
from . import ontology as ontology_mod
from .errors import ClinotateError, ValidationError

# Domain error codes surfaced with HTTP 422 (annotation payload rejected).
_UNPROCESSABLE = {"CrossingSpan", "InapplicableModifier", "DuplicateMention",
                  "OutOfBounds", "UnknownNode"}


@dataclass
class ServiceConfig:
    corpus_path: str
    catalog_path: str | None = None   # None -> packaged seed catalog
    model_path: str | None = None
    canonical_annotator: str = "gold"
    auth_token: str | None = None


class CorpusStore:
    """In-memory corpus with atomic file persistence (single writer)."""

    def __init__(self, path: str, records: list, canonical_annotator: str):
        self.path = path
        self.records = records
        self.by_id = {r.doc.id: r for r in records}
        self.canonical = canonical_annotator
        self.lock = threading.Lock()

    def record(self, doc_id: str):
        return self.by_id.get(doc_id)

    def canonical_set(self, record) -> corpus_mod.AnnotationSet:
        aset = record.annotation_set(self.canonical)
        if aset is None:
            aset = corpus_mod.AnnotationSet(doc_id=record.doc.id,
                                            annotator_id=self.canonical)
        return aset

    def _persist(self):
        directory = os.path.dirname(os.path.abspath(self.path)) or "."
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                for record in self.records:
                    fh.write(corpus_mod.dumps_record(record) + "\n")
            os.replace(tmp, self.path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def add_mention(self, doc_id: str, start: int, end: int, node: str,
                    modifiers, ontology) -> corpus_mod.Mention:
        """Validate, append to the canonical set, persist. Raises domain
        errors before any state changes."""
        with self.lock:
            record = self.by_id[doc_id]
            aset = self.canonical_set(record)
            mention = corpus_mod.Mention(
                id=corpus_mod.next_mention_id(aset),
                span=corpus_mod.Span(start, end), node_id=node,
                modifier_ids=frozenset(modifiers),
                annotator_id=self.canonical)
            updated = corpus_mod.add_mention(aset, mention, ontology, record.doc)
            self._replace_set(record, updated)
            self._persist()
            return updated.mentions[-1]

    def delete_mention(self, doc_id: str, mention_id: str) -> bool:
        with self.lock:
            record = self.by_id[doc_id]
            aset = self.canonical_set(record)
            kept = tuple(m for m in aset.mentions if m.id != mention_id)
            if len(kept) == len(aset.mentions):
                return False
            self._replace_set(record, corpus_mod.AnnotationSet(
                doc_id=aset.doc_id, annotator_id=aset.annotator_id, mentions=kept))
            self._persist()
            return True

    def _replace_set(self, record, new_set):
        for i, aset in enumerate(record.sets):
            if aset.annotator_id == new_set.annotator_id:
                record.sets[i] = new_set
                return
        record.sets.append(new_set)


class AnnotationPayload(BaseModel):
    start: int
    end: int
    node: str
    modifiers: list = []


class PredictPayload(BaseModel):
    text: str


def _error(status: int, code: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code, "detail": detail})


def _mention_dict(m: corpus_mod.Mention) -> dict:
    return {"id": m.id, "start": m.span.start, "end": m.span.end,
            "node": m.node_id, "modifiers": sorted(m.modifier_ids)}


def _catalog_payload(ontology) -> dict:
    children = {}
    for node in ontology.nodes.values():
        for pid in node.parent_ids:
            children.setdefault(pid, []).append(node.id)

    def entry(node_id):
        node = ontology.nodes[node_id]
        return {"id": node.id, "label": node.label, "level": node.level,
                "modifiers": sorted(node.modifier_ids),
                "children": [entry(c) for c in sorted(children.get(node_id, []))]}

    roots = sorted(n.id for n in ontology.nodes.values() if n.level == 1)
    return {
        "version": ontology.version,
        "modifiers": [
            {"id": m.id, "label": m.label,
             "scope": "universal" if m.scope == ontology_mod.UNIVERSAL else sorted(m.scope)}
            for m in sorted(ontology.modifiers.values(), key=lambda m: m.id)
        ],
        "tree": [entry(r) for r in roots],
    }


def create_app(config: ServiceConfig, ui_dir: str | None = None) -> FastAPI:
    """Build the service; corpus and catalog must load and validate."""
    if config.catalog_path:
        with open(config.catalog_path, "rb") as fh:
            ontology = ontology_mod.load_catalog(fh.read())
    else:
        ontology = ontology_mod.seed_catalog()

    records = corpus_mod.load_corpus(config.corpus_path)
    problems = []
    for record in records:
        for aset in record.sets:
            problems.extend(corpus_mod.check_annotation_set(record, aset, ontology))
    if problems:
        raise ValidationError(problems)

    nlp_model = None
    if config.model_path:
        nlp_model = model_mod.load_model(config.model_path,
                                         expected_ontology_version=ontology.version)

    store = CorpusStore(config.corpus_path, records, config.canonical_annotator)

    app = FastAPI(title="clinotate", docs_url=None, redoc_url=None)
    app.state.ontology = ontology
    app.state.store = store
    app.state.model = nlp_model
    app.state.index = index_mod.build_index(
        records, source="gold", canonical_annotator=config.canonical_annotator)
    app.state.index_stale = False
    catalog_payload = _catalog_payload(ontology)
    catalog_etag = f'"{ontology.version}"'

    @app.exception_handler(ClinotateError)
    async def clinotate_error_handler(_request, exc: ClinotateError):
        status = 422 if exc.code in _UNPROCESSABLE else 400
        return _error(status, exc.code, exc.detail)

    @app.exception_handler(RequestValidationError)
    async def body_error_handler(_request, exc: RequestValidationError):
        return _error(400, "ParseError", str(exc.errors()))

    def unauthorized(request: Request):
        if config.auth_token is None:
            return None
        header = request.headers.get("authorization", "")
        if header == f"Bearer {config.auth_token}":
            return None
        return _error(401, "Unauthorized", "missing or invalid bearer token")

    @app.get("/catalog")
    def get_catalog(request: Request):
        denied = unauthorized(request)
        if denied:
            return denied
        if request.headers.get("if-none-match") == catalog_etag:
            return Response(status_code=304, headers={"ETag": catalog_etag})
        return JSONResponse(content=catalog_payload, headers={"ETag": catalog_etag})

    @app.get("/patients/{patient_id}/concepts")
    def get_concepts(patient_id: str, request: Request):
        denied = unauthorized(request)
        if denied:
            return denied
        idx = app.state.index
        rows = index_mod.concept_frequencies(idx, patient_id)
        concepts = []
        for node, label_text, count in rows:
            citations = idx.postings.get((patient_id, node), [])
            negated = bool(citations) and all(
                "negation" in c.modifier_ids for c in citations)
            concepts.append({"node": node, "label": label_text, "count": count,
                             "negated": negated})
        return {"patient_id": patient_id, "concepts": concepts}

    @app.get("/patients/{patient_id}/timeline")
    def get_timeline(patient_id: str, request: Request, node: str | None = None):
        denied = unauthorized(request)
        if denied:
            return denied
        if not node:
            return _error(400, "EmptyQuery", "query parameter 'node' is required")
        citations = index_mod.timeline(app.state.index, patient_id, node)
        return {"patient_id": patient_id, "node": node,
                "citations": [
                    {"date": c.date.isoformat(), "doc_id": c.doc_id,
                     "record_type": c.record_type, "specialty": c.specialty,
                     "start": c.span.start, "end": c.span.end,
                     "modifiers": sorted(c.modifier_ids), "surface": c.surface}
                    for c in citations]}

    @app.get("/patients/{patient_id}/texts")
    def get_texts(patient_id: str, request: Request,
                  nodes: str = "", mode: str = "any"):
        denied = unauthorized(request)
        if denied:
            return denied
        node_ids = [n for n in nodes.split(",") if n]
        if not node_ids:
            return _error(400, "EmptyQuery", "query parameter 'nodes' is required")
        if mode not in ("any", "all"):
            return _error(400, "ParseError", f"unknown mode {mode!r}")
        count, doc_ids = index_mod.texts_with_concepts(
            app.state.index, patient_id, node_ids, mode)
        return {"patient_id": patient_id, "count": count, "doc_ids": doc_ids}

    @app.get("/documents/{doc_id}")
    def get_document(doc_id: str, request: Request):
        denied = unauthorized(request)
        if denied:
            return denied
        record = store.record(doc_id)
        if record is None:
            return _error(404, "NotFound", f"no document {doc_id!r}")
        doc = record.doc
        aset = store.canonical_set(record)
        return {"doc": {"id": doc.id, "patient_id": doc.patient_id,
                        "date": doc.date.isoformat(),
                        "record_type": doc.record_type,
                        "specialty": doc.specialty, "text": doc.text},
                "mentions": [_mention_dict(m) for m in aset.mentions]}

    @app.post("/documents/{doc_id}/annotations", status_code=201)
    def post_annotation(doc_id: str, payload: AnnotationPayload, request: Request):
        denied = unauthorized(request)
        if denied:
            return denied
        if store.record(doc_id) is None:
            return _error(404, "NotFound", f"no document {doc_id!r}")
        mention = store.add_mention(doc_id, payload.start, payload.end,
                                    payload.node, payload.modifiers, ontology)
        app.state.index_stale = True
        return {"mention": _mention_dict(mention)}

    @app.delete("/documents/{doc_id}/annotations/{mention_id}", status_code=204)
    def delete_annotation(doc_id: str, mention_id: str, request: Request):
        denied = unauthorized(request)
        if denied:
            return denied
        if store.record(doc_id) is None:
            return _error(404, "NotFound", f"no document {doc_id!r}")
        if not store.delete_mention(doc_id, mention_id):
            return _error(404, "NotFound", f"no mention {mention_id!r} in {doc_id!r}")
        app.state.index_stale = True
        return Response(status_code=204)

    @app.post("/predict")
    def post_predict(payload: PredictPayload, request: Request):
        denied = unauthorized(request)
        if denied:
            return denied
        if app.state.model is None:
            return _error(503, "NoModel", "service started without a model")
        mentions = model_mod.predict_document(app.state.model, payload.text, ontology)
        return {"mentions": [_mention_dict(m) for m in mentions]}

    @app.post("/admin/reindex")
    def post_reindex(request: Request):
        denied = unauthorized(request)
        if denied:
            return denied
        with store.lock:
            new_index = index_mod.build_index(
                store.records, source="gold",
                canonical_annotator=config.canonical_annotator)
        app.state.index = new_index          # atomic swap
        app.state.index_stale = False
        return {"status": "ok", "citations": new_index.citation_count()}

    if ui_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def serve(config: ServiceConfig, host: str = "127.0.0.1", port: int = 8000,
          ui_dir: str | None = None):  # pragma: no cover - thin uvicorn wrapper
    import uvicorn

    app = create_app(config, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
