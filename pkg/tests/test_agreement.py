import random

import pytest

from clinotate.agreement import (
    MODES,
    agreement_report,
    pairwise_agreement,
    report_to_dict,
)
from clinotate.errors import DocMismatchError, NoOverlapError

from conftest import make_doc, make_mention, make_record, make_set

NODES = ["clinical_findings", "tests", "interventions/medication",
         "pathological_conditions", "anatomic_structure"]


def random_set(rng, doc_id, annotator, n_tokens=40):
    """Non-crossing random mention set over an imaginary token grid."""
    mentions = []
    taken = []
    for k in range(rng.randint(0, 8)):
        start = rng.randrange(0, n_tokens - 1)
        end = rng.randrange(start + 1, min(n_tokens, start + 6) + 1)
        ok = True
        for s, e in taken:
            overlap = start < e and s < end
            nested = (s <= start and end <= e) or (start <= s and e <= end)
            if overlap and not nested:
                ok = False
                break
        if not ok:
            continue
        node = rng.choice(NODES)
        if any((s, e) == (start, end) and m.node_id == node
               for (s, e), m in zip(taken, mentions)):
            continue
        taken.append((start, end))
        mentions.append(make_mention(f"{annotator}-{k}", start, end, node,
                                     annotator=annotator))
    return make_set(doc_id, annotator, mentions)


class TestPairwise:
    def test_identity_is_perfect(self, ontology):
        mentions = [make_mention("m1", 0, 3, "tests"),
                    make_mention("m2", 4, 9, "clinical_findings"),
                    make_mention("m3", 4, 9, "anatomic_structure"),
                    make_mention("m4", 12, 20, "interventions/medication")]
        a = make_set("d1", "a", mentions)
        b = make_set("d1", "b", mentions)
        assert pairwise_agreement(a, b, "exact") == (1.0, 1.0, 1.0)

    def test_half_overlap(self):
        shared = [make_mention("s1", 0, 3, "tests"),
                  make_mention("s2", 5, 9, "clinical_findings")]
        only_a = [make_mention("a1", 11, 14, "devices"),
                  make_mention("a2", 16, 19, "time")]
        only_b = [make_mention("b1", 11, 14, "interventions"),
                  make_mention("b2", 16, 19, "anatomic_structure")]
        a = make_set("d1", "a", shared + only_a)
        b = make_set("d1", "b", shared + only_b)
        assert pairwise_agreement(a, b, "exact") == (0.5, 0.5, 0.5)

    def test_empty_vs_nonempty(self):
        a = make_set("d1", "a", [])
        b = make_set("d1", "b", [make_mention("m1", 0, 4, "tests")])
        assert pairwise_agreement(a, b, "exact") == (0.0, 0.0, 0.0)

    def test_doc_mismatch(self):
        with pytest.raises(DocMismatchError):
            pairwise_agreement(make_set("d1", "a"), make_set("d2", "b"))

    def test_orientation(self):
        # 12 mentions vs 14 mentions, 10 matching -> P = 10/14, R = 10/12
        shared = [make_mention(f"s{i}", i * 10, i * 10 + 4, "tests")
                  for i in range(10)]
        a = make_set("d1", "a", shared + [
            make_mention("a1", 200, 204, "devices"),
            make_mention("a2", 210, 214, "devices")])
        b = make_set("d1", "b", shared + [
            make_mention(f"b{i}", 300 + i * 10, 304 + i * 10, "time")
            for i in range(4)])
        p, r, f1 = pairwise_agreement(a, b, "exact")
        assert p == pytest.approx(10 / 14)
        assert r == pytest.approx(10 / 12)

    def test_f1_symmetric_under_swap(self, ontology):
        rng = random.Random(12)
        for _ in range(100):
            a = random_set(rng, "d1", "a")
            b = random_set(rng, "d1", "b")
            for mode in MODES:
                f_ab = pairwise_agreement(a, b, mode, ontology)[2]
                f_ba = pairwise_agreement(b, a, mode, ontology)[2]
                assert f_ab == pytest.approx(f_ba)

    def test_exact_f1_never_above_relaxed(self, ontology):
        rng = random.Random(21)
        for _ in range(100):
            a = random_set(rng, "d1", "a")
            b = random_set(rng, "d1", "b")
            f_exact = pairwise_agreement(a, b, "exact")[2]
            f_relaxed = pairwise_agreement(a, b, "relaxed")[2]
            assert f_exact <= f_relaxed + 1e-12

    def test_relaxed_counts_overlap(self):
        a = make_set("d1", "a", [make_mention("m1", 0, 10, "tests")])
        b = make_set("d1", "b", [make_mention("m1", 5, 14, "tests")])
        assert pairwise_agreement(a, b, "exact")[2] == 0.0
        assert pairwise_agreement(a, b, "relaxed")[2] == 1.0

    def test_class_only_matches_same_root(self, ontology):
        a = make_set("d1", "a", [make_mention(
            "m1", 0, 10, "pathological_conditions/oncological/lung_cancer")])
        b = make_set("d1", "b", [make_mention(
            "m1", 0, 10, "pathological_conditions/cardiovascular")])
        assert pairwise_agreement(a, b, "exact", ontology)[2] == 0.0
        assert pairwise_agreement(a, b, "class_only", ontology)[2] == 1.0

    def test_class_only_needs_ontology(self):
        a = make_set("d1", "a")
        b = make_set("d1", "b")
        with pytest.raises(ValueError):
            pairwise_agreement(a, b, "class_only")


class TestReport:
    def _record(self, doc_id, a_mentions, b_mentions):
        doc = make_doc(doc_id=doc_id, text="x" * 400)
        return make_record(doc,
                           make_set(doc_id, "a", a_mentions),
                           make_set(doc_id, "b", b_mentions))

    def test_total_disagreement(self, ontology):
        rec = self._record("d1",
                           [make_mention("m1", 0, 4, "tests")],
                           [make_mention("m1", 6, 9, "devices")])
        report = agreement_report([rec], "exact", ontology)
        assert all(p.f1 == 0.0 for p in report.pairs)

    def test_single_doc_equals_pairwise(self, ontology):
        mentions_a = [make_mention("m1", 0, 4, "tests"),
                      make_mention("m2", 6, 9, "devices")]
        mentions_b = [make_mention("m1", 0, 4, "tests")]
        rec = self._record("d1", mentions_a, mentions_b)
        report = agreement_report([rec], "exact", ontology)
        direct = pairwise_agreement(make_set("d1", "a", mentions_a),
                                    make_set("d1", "b", mentions_b), "exact")
        pair = report.pairs[0]
        assert (pair.precision, pair.recall, pair.f1) == direct

    def test_micro_counts_accumulate(self, ontology):
        shared1 = [make_mention(f"s{i}", i * 10, i * 10 + 4, "tests") for i in range(6)]
        shared2 = [make_mention(f"s{i}", i * 10, i * 10 + 4, "devices") for i in range(4)]
        rec1 = self._record("d1", shared1 + [make_mention("x", 200, 205, "time")],
                            shared1 + [make_mention("y", 210, 215, "time")])
        rec2 = self._record("d2", shared2 + [make_mention("x", 220, 225, "time")],
                            shared2 + [make_mention("y2", 230, 235, "time"),
                                       make_mention("y3", 240, 245, "time"),
                                       make_mention("y4", 250, 255, "time")])
        report = agreement_report([rec1, rec2], "exact", ontology)
        pair = report.pairs[0]
        # matches 10, |a| = 12, |b| = 14
        assert pair.precision == pytest.approx(10 / 14)
        assert pair.recall == pytest.approx(10 / 12)

    def test_no_overlap_raises(self, ontology):
        doc = make_doc(doc_id="d1", text="um texto")
        rec = make_record(doc, make_set("d1", "a"))
        with pytest.raises(NoOverlapError):
            agreement_report([rec], "exact", ontology)

    def test_modifier_accuracy(self, ontology):
        same = make_mention("m1", 0, 4, "tests", {"normal"})
        diff_a = make_mention("m2", 6, 10, "tests", {"normal"})
        diff_b = make_mention("m2", 6, 10, "tests", set())
        rec = self._record("d1", [same, diff_a], [same, diff_b])
        report = agreement_report([rec], "exact", ontology)
        assert report.modifier_accuracy == pytest.approx(0.5)

    def test_report_dict_shape(self, ontology):
        rec = self._record("d1", [make_mention("m1", 0, 4, "tests")],
                           [make_mention("m1", 0, 4, "tests")])
        data = report_to_dict(agreement_report([rec], "exact", ontology))
        assert set(data) == {"mode", "pairs", "per_class", "modifier_accuracy"}
        assert data["pairs"][0]["f1"] == 1.0
