"""Inter-annotator agreement over double-annotated documents.

Pairwise micro-F1 over mention tuples, with a greedy one-to-one matching
in document order (earliest unmatched candidate wins). Modifier agreement
is reported separately, as accuracy over exactly-matched mentions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DocMismatchError, NoOverlapError
from .ontology import level1_roots

MODES = ("exact", "relaxed", "class_only")


@dataclass(frozen=True)
class PairAgreement:
    annotator_a: str
    annotator_b: str
    precision: float
    recall: float
    f1: float
    support: int  # total mentions across both annotators' sets


@dataclass
class AgreementReport:
    mode: str
    pairs: list                 # PairAgreement, sorted by annotator pair
    per_class: dict             # level-1 node id -> f1 across all pairs
    modifier_accuracy: float | None  # over exact matches, None if none exist


def _matches(a_mention, b_mention, mode: str, ontology) -> bool:
    if mode == "exact":
        return (a_mention.span == b_mention.span
                and a_mention.node_id == b_mention.node_id)
    if mode == "relaxed":
        return (a_mention.span.overlaps(b_mention.span)
                and a_mention.node_id == b_mention.node_id)
    if mode == "class_only":
        return (a_mention.span == b_mention.span
                and level1_roots(ontology, a_mention.node_id)
                == level1_roots(ontology, b_mention.node_id))
    raise ValueError(f"unknown agreement mode {mode!r}")


def _doc_order(mentions):
    return sorted(mentions, key=lambda m: (m.span.start, m.span.end, m.node_id, m.id))


def _pair_counts(a_mentions, b_mentions, mode: str, ontology):
    """(matched, |a|, |b|) under greedy document-order one-to-one matching."""
    a_sorted = _doc_order(a_mentions)
    b_sorted = _doc_order(b_mentions)
    taken = [False] * len(b_sorted)
    matched = 0
    for am in a_sorted:
        for i, bm in enumerate(b_sorted):
            if not taken[i] and _matches(am, bm, mode, ontology):
                taken[i] = True
                matched += 1
                break
    return matched, len(a_sorted), len(b_sorted)


def _prf(matched: int, n_a: int, n_b: int):
    precision = matched / n_b if n_b else 0.0
    recall = matched / n_a if n_a else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def pairwise_agreement(a, b, mode: str = "exact", ontology=None):
    """(precision, recall, f1) between two annotation sets on one document."""
    if a.doc_id != b.doc_id:
        raise DocMismatchError(f"sets cover {a.doc_id!r} and {b.doc_id!r}")
    if mode == "class_only" and ontology is None:
        raise ValueError("class_only mode needs the ontology")
    return _prf(*_pair_counts(a.mentions, b.mentions, mode, ontology))


def _exact_match_pairs(a_mentions, b_mentions):
    """Exactly-matched mention pairs (for modifier accuracy)."""
    b_sorted = _doc_order(b_mentions)
    taken = [False] * len(b_sorted)
    pairs = []
    for am in _doc_order(a_mentions):
        for i, bm in enumerate(b_sorted):
            if (not taken[i] and am.span == bm.span and am.node_id == bm.node_id):
                taken[i] = True
                pairs.append((am, bm))
                break
    return pairs


def agreement_report(records, mode: str = "exact", ontology=None) -> AgreementReport:
    """Micro-aggregated agreement across all doubly-annotated documents.

    Raises NoOverlap when no document carries two annotator sets.
    """
    if mode == "class_only" and ontology is None:
        raise ValueError("class_only mode needs the ontology")
    pair_counts = {}    # (a_id, b_id) -> [matched, n_a, n_b]
    class_counts = {}   # root -> [matched, n_a, n_b]
    mod_correct = mod_total = 0
    any_overlap = False

    for record in records:
        sets = sorted(record.sets, key=lambda s: s.annotator_id)
        if len(sets) < 2:
            continue
        any_overlap = True
        for i in range(len(sets)):
            for j in range(i + 1, len(sets)):
                a, b = sets[i], sets[j]
                key = (a.annotator_id, b.annotator_id)
                m, na, nb = _pair_counts(a.mentions, b.mentions, mode, ontology)
                slot = pair_counts.setdefault(key, [0, 0, 0])
                slot[0] += m
                slot[1] += na
                slot[2] += nb
                if ontology is not None:
                    roots = {root for s in (a, b) for mention in s.mentions
                             for root in level1_roots(ontology, mention.node_id)}
                    for root in roots:
                        am = [x for x in a.mentions
                              if root in level1_roots(ontology, x.node_id)]
                        bm = [x for x in b.mentions
                              if root in level1_roots(ontology, x.node_id)]
                        cm, cna, cnb = _pair_counts(am, bm, mode, ontology)
                        cslot = class_counts.setdefault(root, [0, 0, 0])
                        cslot[0] += cm
                        cslot[1] += cna
                        cslot[2] += cnb
                for am, bm in _exact_match_pairs(a.mentions, b.mentions):
                    mod_total += 1
                    mod_correct += int(am.modifier_ids == bm.modifier_ids)

    if not any_overlap:
        raise NoOverlapError("no document has two annotator sets")

    pairs = []
    for (a_id, b_id), (m, na, nb) in sorted(pair_counts.items()):
        p, r, f1 = _prf(m, na, nb)
        pairs.append(PairAgreement(a_id, b_id, p, r, f1, na + nb))
    per_class = {root: _prf(*c)[2] for root, c in sorted(class_counts.items())}
    return AgreementReport(
        mode=mode, pairs=pairs, per_class=per_class,
        modifier_accuracy=(mod_correct / mod_total) if mod_total else None)


def report_to_dict(report: AgreementReport) -> dict:
    return {
        "mode": report.mode,
        "pairs": [
            {"annotator_a": p.annotator_a, "annotator_b": p.annotator_b,
             "precision": p.precision, "recall": p.recall, "f1": p.f1,
             "support": p.support}
            for p in report.pairs
        ],
        "per_class": dict(report.per_class),
        "modifier_accuracy": report.modifier_accuracy,
    }


def format_report(report: AgreementReport) -> str:
    lines = [f"mode: {report.mode}"]
    lines.append(f"{'annotators':<24}{'P':>8}{'R':>8}{'F1':>8}{'support':>9}")
    for p in report.pairs:
        name = f"{p.annotator_a}/{p.annotator_b}"
        lines.append(f"{name:<24}{p.precision:>8.4f}{p.recall:>8.4f}{p.f1:>8.4f}{p.support:>9}")
    for root, f1 in report.per_class.items():
        lines.append(f"  {root:<22}{'':>16}{f1:>8.4f}")
    if report.modifier_accuracy is not None:
        lines.append(f"modifier accuracy on exact matches: {report.modifier_accuracy:.4f}")
    return "\n".join(lines)
