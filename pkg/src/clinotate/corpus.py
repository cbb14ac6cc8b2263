"""Documents and standoff annotations: nested mentions over clinical text.

Offsets are Unicode scalar-value character offsets, half-open. Values are
immutable; mutation happens through operations returning updated values,
so distinct documents can be processed in parallel without locking.
"""

from __future__ import annotations

import json
import logging
import math
import random
import re
from dataclasses import dataclass, field, replace
from datetime import date as Date

from .errors import (
    BadConfigError,
    BadRatiosError,
    CrossingSpanError,
    DocMismatchError,
    DuplicateMentionError,
    OutOfBoundsError,
    ParseError,
    UnknownNodeError,
    InapplicableModifierError,
)

log = logging.getLogger(__name__)

RECORD_TYPES = ("daily_note", "test_result", "discharge_summary", "medical_history")


@dataclass(frozen=True, order=True)
class Span:
    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end <= self.start:
            raise OutOfBoundsError(f"bad span [{self.start},{self.end})")

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end

    def crosses(self, other: "Span") -> bool:
        """Overlap without containment in either direction."""
        return (self.overlaps(other)
                and not self.contains(other)
                and not other.contains(self))


@dataclass(frozen=True)
class Token:
    span: Span
    form: str


@dataclass(frozen=True)
class Document:
    id: str
    patient_id: str
    date: Date
    record_type: str
    specialty: str
    text: str

    def __post_init__(self):
        if self.record_type not in RECORD_TYPES:
            raise ParseError(f"unknown record type {self.record_type!r}")
        if not self.text:
            raise ParseError(f"document {self.id!r} has empty text")


@dataclass(frozen=True)
class Mention:
    id: str
    span: Span
    node_id: str
    modifier_ids: frozenset = field(default_factory=frozenset)
    annotator_id: str = ""


@dataclass(frozen=True)
class AnnotationSet:
    doc_id: str
    annotator_id: str
    mentions: tuple = ()


@dataclass
class AnnotatedDocument:
    """One document with all its per-annotator mention sets."""
    doc: Document
    sets: list

    def annotation_set(self, annotator_id: str):
        for aset in self.sets:
            if aset.annotator_id == annotator_id:
                return aset
        return None


# ---------------------------------------------------------------------------
# Tokenization

def tokenize(text: str) -> list:
    """Deterministic tokenizer.

    Maximal runs of letters-or-digits form one token; a "." flanked by
    digits stays inside the run (so "49.5" is one token but "49 . 5" is
    three); every other non-whitespace character is its own token.
    """
    tokens = []
    n = len(text)
    i = 0
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isalnum():
            j = i + 1
            while j < n:
                if text[j].isalnum():
                    j += 1
                elif (text[j] == "." and j + 1 < n
                      and text[j - 1].isdigit() and text[j + 1].isdigit()):
                    j += 1
                else:
                    break
            tokens.append(Token(Span(i, j), text[i:j]))
            i = j
        else:
            tokens.append(Token(Span(i, i + 1), ch))
            i += 1
    return tokens


def sentence_ranges(text: str, tokens: list) -> list:
    """Sentence boundaries as half-open token-index ranges.

    A sentence closes after a ".", "!" or "?" token (unless the "." has
    digit characters on both sides in the raw text) and at any newline
    between tokens.
    """
    ranges = []
    start = 0
    for k, tok in enumerate(tokens):
        split = False
        if tok.form in (".", "!", "?"):
            s, e = tok.span.start, tok.span.end
            digit_flanked = (tok.form == "." and s > 0 and e < len(text)
                             and text[s - 1].isdigit() and text[e].isdigit())
            split = not digit_flanked
        if not split:
            gap_end = tokens[k + 1].span.start if k + 1 < len(tokens) else len(text)
            if "\n" in text[tok.span.end:gap_end]:
                split = True
        if split:
            ranges.append((start, k + 1))
            start = k + 1
    if start < len(tokens):
        ranges.append((start, len(tokens)))
    return ranges


def token_boundaries(tokens: list) -> tuple:
    starts = {t.span.start for t in tokens}
    ends = {t.span.end for t in tokens}
    return starts, ends


def snap_to_tokens(tokens: list, span: Span):
    """Smallest covering token-index range for a character span.

    Returns None when the span covers no token; logs a warning when the
    snap actually moved a boundary (sub-token gold annotation).
    """
    first = last = None
    for idx, tok in enumerate(tokens):
        if tok.span.end > span.start and tok.span.start < span.end:
            if first is None:
                first = idx
            last = idx
    if first is None:
        return None
    snapped = (tokens[first].span.start, tokens[last].span.end)
    if snapped != (span.start, span.end):
        log.warning("span [%d,%d) snapped outward to token span [%d,%d)",
                    span.start, span.end, snapped[0], snapped[1])
    return (first, last + 1)


def span_for_token_range(tokens: list, trange: tuple) -> Span:
    s, e = trange
    return Span(tokens[s].span.start, tokens[e - 1].span.end)


# ---------------------------------------------------------------------------
# Annotation editing

def _check_mention(existing: tuple, mention: Mention, ontology, doc: Document):
    """Raise the first violated rule for adding `mention` to `existing`."""
    span = mention.span
    if span.end > len(doc.text):
        raise OutOfBoundsError(
            f"span [{span.start},{span.end}) exceeds document length {len(doc.text)}")
    if not doc.text[span.start:span.end].strip():
        raise OutOfBoundsError(
            f"span [{span.start},{span.end}) contains only whitespace")
    node = ontology.node(mention.node_id)  # raises UnknownNode
    bad = mention.modifier_ids - node.modifier_ids
    if bad:
        raise InapplicableModifierError(
            f"modifier(s) {sorted(bad)} not applicable to node {node.id!r}")
    for other in existing:
        if other.span == span and other.node_id == mention.node_id:
            raise DuplicateMentionError(
                f"({span.start},{span.end},{mention.node_id}) already annotated")
    for other in existing:
        if span.crosses(other.span):
            raise CrossingSpanError(
                f"span [{span.start},{span.end}) crosses existing "
                f"[{other.span.start},{other.span.end})")


def add_mention(aset: AnnotationSet, mention: Mention, ontology, doc: Document) -> AnnotationSet:
    """Append a mention iff all nesting/applicability rules hold.

    Raises OutOfBounds, UnknownNode, InapplicableModifier, DuplicateMention
    or CrossingSpan; on success returns the updated set (input unchanged).
    """
    if doc.id != aset.doc_id:
        raise DocMismatchError(
            f"annotation set is for {aset.doc_id!r}, not {doc.id!r}")
    _check_mention(aset.mentions, mention, ontology, doc)
    if mention.annotator_id != aset.annotator_id:
        mention = replace(mention, annotator_id=aset.annotator_id)
    return replace(aset, mentions=aset.mentions + (mention,))


def next_mention_id(aset: AnnotationSet) -> str:
    taken = {m.id for m in aset.mentions}
    k = len(aset.mentions) + 1
    while f"m{k}" in taken:
        k += 1
    return f"m{k}"


@dataclass
class BulkAnnotateResult:
    annotation_set: AnnotationSet
    added: list
    skipped: list  # (Span, error code) pairs


def annotate_all_occurrences(aset: AnnotationSet, doc: Document, surface: str,
                             node_id: str, ontology, modifier_ids=()) -> BulkAnnotateResult:
    """Annotate every token-aligned, case-sensitive occurrence of `surface`.

    Occurrences rejected by the nesting rules are skipped and reported,
    not raised.
    """
    if not surface:
        raise BadConfigError("surface must be non-empty")
    tokens = tokenize(doc.text)
    starts, ends = token_boundaries(tokens)
    added, skipped = [], []
    pos = doc.text.find(surface)
    while pos != -1:
        end = pos + len(surface)
        if pos in starts and end in ends:
            span = Span(pos, end)
            mention = Mention(id=next_mention_id(aset), span=span, node_id=node_id,
                              modifier_ids=frozenset(modifier_ids),
                              annotator_id=aset.annotator_id)
            try:
                aset = add_mention(aset, mention, ontology, doc)
                added.append(aset.mentions[-1])
            except (CrossingSpanError, DuplicateMentionError, UnknownNodeError,
                    InapplicableModifierError, OutOfBoundsError) as exc:
                skipped.append((span, exc.code))
        pos = doc.text.find(surface, pos + 1)
    return BulkAnnotateResult(aset, added, skipped)


def check_annotation_set(record: AnnotatedDocument, aset: AnnotationSet, ontology) -> list:
    """Replay a stored set through the add rules; returns reason strings."""
    problems = []
    rebuilt = AnnotationSet(doc_id=aset.doc_id, annotator_id=aset.annotator_id)
    for m in aset.mentions:
        try:
            rebuilt = add_mention(rebuilt, m, ontology, record.doc)
        except (CrossingSpanError, DuplicateMentionError, UnknownNodeError,
                InapplicableModifierError, OutOfBoundsError) as exc:
            problems.append(f"{aset.annotator_id}/{m.id}: {exc.code}: {exc.detail}")
    return problems


# ---------------------------------------------------------------------------
# Dataset splitting

DEFAULT_SPLIT_RATIOS = (0.899, 0.052, 0.049)


def split_dataset(corpus: list, ratios=DEFAULT_SPLIT_RATIOS, seed: int = 0):
    """Shuffle with a seeded PRNG and partition by document count.

    Counts come from flooring n*ratio (tiny epsilon guards float noise),
    leftover documents go to the splits with the largest fractional part.
    """
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise BadRatiosError(f"ratios must be three positive numbers, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise BadRatiosError(f"ratios must sum to 1, got {sum(ratios)}")
    docs = list(corpus)
    random.Random(seed).shuffle(docs)
    n = len(docs)
    raw = [n * r for r in ratios]
    counts = [math.floor(x + 1e-9) for x in raw]
    remainder = n - sum(counts)
    by_frac = sorted(range(3), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in range(remainder):
        counts[by_frac[i % 3]] += 1
    train = docs[:counts[0]]
    dev = docs[counts[0]:counts[0] + counts[1]]
    test = docs[counts[0] + counts[1]:]
    return train, dev, test


def split_stats(train, dev, test) -> list:
    """Per-split document, vocabulary and sentence counts."""
    rows = []
    for name, split in (("Train", train), ("Dev", dev), ("Test", test)):
        vocab = set()
        n_sentences = 0
        for record in split:
            doc = record.doc if isinstance(record, AnnotatedDocument) else record
            tokens = tokenize(doc.text)
            vocab.update(t.form for t in tokens)
            n_sentences += len(sentence_ranges(doc.text, tokens))
        rows.append({"set": name, "documents": len(split),
                     "vocabulary": len(vocab), "sentences": n_sentences})
    return rows


def format_split_stats(rows: list) -> str:
    header = f"{'Set':<8}{'documents':>12}{'vocabulary':>12}{'sentences':>12}"
    lines = [header]
    for r in rows:
        lines.append(f"{r['set']:<8}{r['documents']:>12}{r['vocabulary']:>12}{r['sentences']:>12}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Pseudonymization audit

DEFAULT_NAME_LIST = [
    "João", "Maria", "José", "Ana", "António", "Manuel", "Silva", "Santos",
    "Ferreira", "Pereira", "Oliveira", "Costa", "Rodrigues", "Martins",
]

DEFAULT_AUDIT_RULES = [
    {"id": "long-digit-run", "pattern": {"type": "digit_run", "min": 7}},
    {"id": "dob-shape", "pattern": {"type": "date_shape"}},
    {"id": "name-list", "pattern": {"type": "name_list", "names": DEFAULT_NAME_LIST}},
]


@dataclass(frozen=True)
class Finding:
    rule_id: str
    span: Span
    excerpt: str


def _compile_audit_rule(rule: dict):
    try:
        rid = rule["id"]
        pattern = rule["pattern"]
        kind = pattern["type"]
    except (KeyError, TypeError) as exc:
        raise BadConfigError(f"malformed audit rule {rule!r}") from exc
    if kind == "digit_run":
        lo = int(pattern.get("min", 7))
        hi = pattern.get("max")
        bound = f"{{{lo},{int(hi)}}}" if hi is not None else f"{{{lo},}}"
        return rid, re.compile(rf"(?<!\d)\d{bound}(?!\d)")
    if kind == "date_shape":
        return rid, re.compile(r"(?<![\d/-])\d{1,2}[/-]\d{1,2}[/-]\d{2,4}(?![\d/-])")
    if kind == "name_list":
        names = pattern.get("names")
        if not names:
            raise BadConfigError(f"name_list rule {rid!r} has no names")
        alternation = "|".join(re.escape(n) for n in sorted(names, key=len, reverse=True))
        return rid, re.compile(rf"(?<!\w)(?:{alternation})(?!\w)")
    raise BadConfigError(f"unknown audit pattern type {kind!r}")


def pseudonymization_audit(doc: Document, rules=None) -> list:
    """Scan text for identifier-shaped content; empty result = audit pass."""
    if rules is None:
        rules = DEFAULT_AUDIT_RULES
    findings = []
    for rule in rules:
        rid, regex = _compile_audit_rule(rule)
        for m in regex.finditer(doc.text):
            findings.append(Finding(rid, Span(m.start(), m.end()), m.group(0)))
    findings.sort(key=lambda f: (f.span.start, f.span.end, f.rule_id))
    return findings


# ---------------------------------------------------------------------------
# Corpus file format: JSON-lines, one document (with all annotator sets) per line

def mention_to_dict(m: Mention) -> dict:
    return {"id": m.id, "start": m.span.start, "end": m.span.end,
            "node": m.node_id, "modifiers": sorted(m.modifier_ids)}


def mention_from_dict(d: dict, annotator_id: str) -> Mention:
    return Mention(id=d["id"], span=Span(int(d["start"]), int(d["end"])),
                   node_id=d["node"], modifier_ids=frozenset(d.get("modifiers", [])),
                   annotator_id=annotator_id)


def record_to_dict(record: AnnotatedDocument) -> dict:
    doc = record.doc
    return {
        "doc": {
            "id": doc.id, "patient_id": doc.patient_id,
            "date": doc.date.isoformat(), "record_type": doc.record_type,
            "specialty": doc.specialty, "text": doc.text,
        },
        "annotations": [
            {"annotator_id": aset.annotator_id,
             "mentions": [mention_to_dict(m) for m in aset.mentions]}
            for aset in record.sets
        ],
    }


def record_from_dict(data: dict) -> AnnotatedDocument:
    try:
        d = data["doc"]
        doc = Document(id=d["id"], patient_id=d["patient_id"],
                       date=Date.fromisoformat(d["date"]),
                       record_type=d["record_type"], specialty=d["specialty"],
                       text=d["text"])
        sets = []
        for a in data.get("annotations", []):
            mentions = tuple(mention_from_dict(m, a["annotator_id"])
                             for m in a.get("mentions", []))
            sets.append(AnnotationSet(doc_id=doc.id, annotator_id=a["annotator_id"],
                                      mentions=mentions))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed corpus record: {exc}") from exc
    return AnnotatedDocument(doc=doc, sets=sets)


def dumps_record(record: AnnotatedDocument) -> str:
    return json.dumps(record_to_dict(record), ensure_ascii=False, sort_keys=True)


def loads_record(line: str) -> AnnotatedDocument:
    try:
        data = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"corpus line is not valid JSON: {exc}") from exc
    return record_from_dict(data)


def save_corpus(records: list, path):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(dumps_record(record) + "\n")


def load_corpus(path) -> list:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(loads_record(line))
            except ParseError as exc:
                raise ParseError(f"{path}:{lineno}: {exc.detail}") from exc
    return records
