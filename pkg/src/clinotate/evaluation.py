"""NERC scoring of predicted against gold nested mentions.

A prediction is correct iff its (character span, node id) exactly matches
a distinct gold mention. Depth breakdowns attribute matched mentions at
the gold forest's depth (0 = outermost); unmatched predictions count
toward precision at their own depth in the predicted forest.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DocMismatchError
from .ontology import level1_roots


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float


@dataclass
class EvalReport:
    micro: PRF
    macro_by_level1: dict       # level-1 node id -> PRF
    by_depth: dict              # depth -> PRF
    by_depth_counts: dict       # depth -> (gold, predicted, correct)
    modifier_accuracy: float    # exact modifier-set match over correct mentions
    per_modifier_accuracy: dict  # modifier id -> accuracy over applicable correct mentions
    counts: tuple               # (gold, predicted, correct)


def _prf(n_gold: int, n_pred: int, n_correct: int) -> PRF:
    p = n_correct / n_pred if n_pred else 0.0
    r = n_correct / n_gold if n_gold else 0.0
    f1 = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return PRF(p, r, f1)


def forest_depths(mentions) -> list:
    """Depth of each mention in its span forest: the number of distinct
    spans strictly containing it. Same-span multi-labels share one forest
    node, so they share a depth."""
    spans = {(m.span.start, m.span.end) for m in mentions}
    depths = []
    for m in mentions:
        s = (m.span.start, m.span.end)
        depths.append(sum(1 for o in spans
                          if o != s and o[0] <= s[0] and s[1] <= o[1]))
    return depths


def _match_doc(gold, pred) -> list:
    """Greedy one-to-one exact matching; returns (gold idx, pred idx) pairs."""
    free = list(range(len(gold)))
    pairs = []
    for pi, pm in enumerate(pred):
        for k, gi in enumerate(free):
            gm = gold[gi]
            if gm.span == pm.span and gm.node_id == pm.node_id:
                pairs.append((gi, pi))
                free.pop(k)
                break
    return pairs


def _as_doc_map(mentions):
    if isinstance(mentions, dict):
        return mentions
    return {"_doc": list(mentions)}


def nerc_scores(gold, pred, ontology) -> EvalReport:
    """Score a prediction set against gold.

    `gold` and `pred` are either parallel dicts doc_id -> mentions or two
    plain mention lists for a single document. Raises DocMismatch when the
    document sets differ.
    """
    gold_map = _as_doc_map(gold)
    pred_map = _as_doc_map(pred)
    if set(gold_map) != set(pred_map):
        raise DocMismatchError(
            f"gold has {sorted(gold_map)}, predictions have {sorted(pred_map)}")

    n_gold = n_pred = n_correct = 0
    class_counts = {}   # root -> [gold, pred, correct]
    depth_counts = {}   # depth -> [gold, pred, correct]
    n_mod_exact = 0
    mod_hits = {}       # modifier -> [correct, total]

    for doc_id in sorted(gold_map):
        gold_mentions = list(gold_map[doc_id])
        pred_mentions = list(pred_map[doc_id])
        pairs = _match_doc(gold_mentions, pred_mentions)
        matched_gold = {gi for gi, _ in pairs}
        matched_pred = {pi for _, pi in pairs}
        gold_depths = forest_depths(gold_mentions)
        pred_depths = forest_depths(pred_mentions)

        n_gold += len(gold_mentions)
        n_pred += len(pred_mentions)
        n_correct += len(pairs)

        for gi, gm in enumerate(gold_mentions):
            d = gold_depths[gi]
            depth_counts.setdefault(d, [0, 0, 0])[0] += 1
            for root in level1_roots(ontology, gm.node_id):
                class_counts.setdefault(root, [0, 0, 0])[0] += 1
        for pi, pm in enumerate(pred_mentions):
            for root in level1_roots(ontology, pm.node_id):
                class_counts.setdefault(root, [0, 0, 0])[1] += 1
        for gi, pi in pairs:
            d = gold_depths[gi]
            depth_counts.setdefault(d, [0, 0, 0])[1] += 1
            depth_counts[d][2] += 1
            for root in level1_roots(ontology, gold_mentions[gi].node_id):
                class_counts.setdefault(root, [0, 0, 0])[2] += 1
        for pi in range(len(pred_mentions)):
            if pi not in matched_pred:
                d = pred_depths[pi]
                depth_counts.setdefault(d, [0, 0, 0])[1] += 1

        for gi, pi in pairs:
            gm, pm = gold_mentions[gi], pred_mentions[pi]
            if gm.modifier_ids == pm.modifier_ids:
                n_mod_exact += 1
            for mod_id in sorted(ontology.node(gm.node_id).modifier_ids):
                hit = (mod_id in gm.modifier_ids) == (mod_id in pm.modifier_ids)
                slot = mod_hits.setdefault(mod_id, [0, 0])
                slot[0] += int(hit)
                slot[1] += 1

    report = EvalReport(
        micro=_prf(n_gold, n_pred, n_correct),
        macro_by_level1={root: _prf(*c) for root, c in sorted(class_counts.items())},
        by_depth={d: _prf(*c) for d, c in sorted(depth_counts.items())},
        by_depth_counts={d: tuple(c) for d, c in sorted(depth_counts.items())},
        modifier_accuracy=(n_mod_exact / n_correct) if n_correct else 0.0,
        per_modifier_accuracy={m: hits / total for m, (hits, total)
                               in sorted(mod_hits.items()) if total},
        counts=(n_gold, n_pred, n_correct),
    )
    return report


def report_to_dict(report: EvalReport) -> dict:
    def prf(x):
        return {"precision": x.precision, "recall": x.recall, "f1": x.f1}

    return {
        "micro": prf(report.micro),
        "macro_by_level1": {k: prf(v) for k, v in report.macro_by_level1.items()},
        "by_depth": {str(k): prf(v) for k, v in report.by_depth.items()},
        "by_depth_counts": {str(k): list(v) for k, v in report.by_depth_counts.items()},
        "modifier_accuracy": report.modifier_accuracy,
        "per_modifier_accuracy": dict(report.per_modifier_accuracy),
        "counts": {"gold": report.counts[0], "predicted": report.counts[1],
                   "correct": report.counts[2]},
    }


def format_report(report: EvalReport) -> str:
    lines = []
    g, p, c = report.counts
    lines.append(f"{'':<26}{'P':>8}{'R':>8}{'F1':>8}")
    m = report.micro
    lines.append(f"{'micro':<26}{m.precision:>8.4f}{m.recall:>8.4f}{m.f1:>8.4f}"
                 f"   (gold {g}, predicted {p}, correct {c})")
    for root, prf in report.macro_by_level1.items():
        lines.append(f"{root[:26]:<26}{prf.precision:>8.4f}{prf.recall:>8.4f}{prf.f1:>8.4f}")
    for depth, prf in report.by_depth.items():
        lines.append(f"{'depth ' + str(depth):<26}{prf.precision:>8.4f}{prf.recall:>8.4f}{prf.f1:>8.4f}")
    lines.append(f"modifier set accuracy: {report.modifier_accuracy:.4f}")
    for mod, acc in report.per_modifier_accuracy.items():
        lines.append(f"  {mod:<24}{acc:>8.4f}")
    return "\n".join(lines)
