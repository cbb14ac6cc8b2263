"""Synthetic clinical-corpus generator with exact gold nested mentions.

Private hospital text cannot ship, so fixtures and benchmarks run on
template-generated Portuguese-like sentences. Every filled slot produces a
gold mention (plus nested sub-mentions where the lexicon entry declares
them), and every gold set is built through the regular add_mention rules,
so generator output always satisfies the corpus invariants. Deterministic
for a given (config, seed).
"""

from __future__ import annotations

import random
import re
from datetime import date as Date, timedelta

from .corpus import (
    AnnotatedDocument,
    AnnotationSet,
    Document,
    Mention,
    Span,
    add_mention,
)
from .errors import BadConfigError

_SLOT_RE = re.compile(r"\{(\w+)\}")

SPECIALTIES = ["Medicina Interna", "Cardiologia", "Pneumologia",
               "Neurologia", "Oncologia", "Cirurgia Geral"]

RECORD_TYPE_POOL = ["daily_note", "test_result", "discharge_summary", "medical_history"]

_FINDING = "clinical_findings/symptoms_signs"
_RESULT = "clinical_findings/test_results"
_ANAT = "anatomic_structure"
_COND = "pathological_conditions"
_MED = "interventions/medication"
_TEST = "tests"


def _nested(surface, node, *subs):
    """Lexicon entry with nested sub-mentions given as (word_start, word_end, node)."""
    return {"surface": surface, "node": node,
            "nested": [{"word_start": ws, "word_end": we, "node": n}
                       for ws, we, n in subs]}


def _plain(surface, node):
    return {"surface": surface, "node": node}


# Finding + anatomy combinations; word 2 (or the noun after "do/da") is the
# anatomic structure, mirroring the "pleural effusion" nesting pattern.
_FINDING_NESTED = [
    _nested("derrame pleural", _FINDING, (1, 2, _ANAT)),
    _nested("dor abdominal", _FINDING, (1, 2, _ANAT)),
    _nested("dor torácica", _FINDING, (1, 2, _ANAT)),
    _nested("dor lombar", _FINDING, (1, 2, _ANAT)),
    _nested("dor cervical", _FINDING, (1, 2, _ANAT)),
    _nested("dor ocular", _FINDING, (1, 2, _ANAT)),
    _nested("edema pulmonar", _FINDING, (1, 2, _ANAT)),
    _nested("edema periférico", _FINDING, (1, 2, _ANAT)),
    _nested("edema palpebral", _FINDING, (1, 2, _ANAT)),
    _nested("massa abdominal", _FINDING, (1, 2, _ANAT)),
    _nested("massa cervical", _FINDING, (1, 2, _ANAT)),
    _nested("massa hepática", _FINDING, (1, 2, _ANAT)),
    _nested("lesão cutânea", _FINDING, (1, 2, _ANAT)),
    _nested("lesão hepática", _FINDING, (1, 2, _ANAT)),
    _nested("lesão renal", _FINDING, (1, 2, _ANAT)),
    _nested("hemorragia digestiva", _FINDING, (1, 2, _ANAT)),
    _nested("hemorragia conjuntival", _FINDING, (1, 2, _ANAT)),
    _nested("distensão abdominal", _FINDING, (1, 2, _ANAT)),
    _nested("rigidez articular", _FINDING, (1, 2, _ANAT)),
    _nested("rigidez cervical", _FINDING, (1, 2, _ANAT)),
    _nested("sopro cardíaco", _FINDING, (1, 2, _ANAT)),
    _nested("atrofia muscular", _FINDING, (1, 2, _ANAT)),
    _nested("congestão pulmonar", _FINDING, (1, 2, _ANAT)),
    _nested("nódulo tiroideu", _FINDING, (1, 2, _ANAT)),
    _nested("nódulo pulmonar", _FINDING, (1, 2, _ANAT)),
    _nested("úlcera gástrica", _FINDING, (1, 2, _ANAT)),
    _nested("espasmo brônquico", _FINDING, (1, 2, _ANAT)),
    _nested("derrame pericárdico", _FINDING, (1, 2, _ANAT)),
    _nested("enfisema subcutâneo", _FINDING, (1, 2, _ANAT)),
    _nested("fibrose pulmonar", _FINDING, (1, 2, _ANAT)),
    _nested("dilatação brônquica", _FINDING, (1, 2, _ANAT)),
    _nested("obstrução nasal", _FINDING, (1, 2, _ANAT)),
    _nested("dor no joelho", _FINDING, (2, 3, _ANAT)),
    _nested("dor no ombro", _FINDING, (2, 3, _ANAT)),
    _nested("edema dos tornozelos", _FINDING, (2, 3, _ANAT)),
    _nested("tumefação do punho", _FINDING, (2, 3, _ANAT)),
]

_SYMPTOM = [_plain(s, _FINDING) for s in [
    "febre", "tosse", "dispneia", "astenia", "náuseas", "vómitos",
    "cefaleias", "tonturas", "anorexia", "diarreia", "obstipação",
    "prurido", "icterícia", "palpitações", "síncope", "mialgias",
    "artralgias", "odinofagia", "disfagia", "rouquidão", "hemoptises",
    "epistáxis", "poliúria", "disúria", "insónia", "sudorese", "calafrios",
]]

_CONDITION = [
    _plain("hipertensão arterial", _COND + "/cardiovascular"),
    _plain("fibrilhação auricular", _COND + "/cardiovascular"),
    _nested("insuficiência cardíaca", _COND + "/cardiovascular/heart_failure", (1, 2, _ANAT)),
    _nested("enfarte do miocárdio", _COND + "/cardiovascular", (2, 3, _ANAT)),
    _nested("doença coronária", _COND + "/cardiovascular", (1, 2, _ANAT)),
    _nested("asma brônquica", _COND + "/respiratory", (1, 2, _ANAT)),
    _plain("bronquite crónica", _COND + "/respiratory"),
    _plain("pneumonia adquirida", _COND + "/infectious/pneumonia"),
    _plain("tuberculose", _COND + "/infectious"),
    _plain("gripe sazonal", _COND + "/infectious"),
    _plain("celulite infecciosa", _COND + "/infectious"),
    _plain("epilepsia", _COND + "/neurological"),
    _plain("enxaqueca", _COND + "/neurological"),
    _plain("doença de Parkinson", _COND + "/degenerative"),
    _plain("esclerodermia", _COND + "/degenerative/scleroderma"),
    _plain("artrose", _COND + "/degenerative"),
    _plain("osteoporose", _COND + "/degenerative"),
    _nested("carcinoma da mama", _COND + "/oncological", (2, 3, _ANAT)),
    _nested("cancro do pulmão", _COND + "/oncological/lung_cancer", (2, 3, _ANAT)),
    _plain("linfoma", _COND + "/oncological"),
    _plain("diabetes mellitus", _COND),
    _plain("dislipidemia", _COND),
    _plain("obesidade", _COND),
    _plain("hipotiroidismo", _COND),
    _plain("anemia ferropénica", _COND),
    _nested("doença renal crónica", _COND, (1, 2, _ANAT)),
]

_MEDICATION = [_plain(s, _MED) for s in [
    "paracetamol", "ibuprofeno", "amoxicilina", "omeprazol", "furosemida",
    "varfarina", "metformina", "insulina", "atorvastatina", "lisinopril",
    "bisoprolol", "amlodipina", "sertralina", "diazepam", "tramadol",
    "morfina", "prednisolona", "salbutamol", "enoxaparina", "ceftriaxona",
]]

_TEST_ENTRIES = [
    _nested("radiografia do tórax", _TEST, (2, 3, _ANAT)),
    _nested("ecografia abdominal", _TEST, (1, 2, _ANAT)),
    _nested("ecografia renal", _TEST, (1, 2, _ANAT)),
    _nested("ressonância cerebral", _TEST, (1, 2, _ANAT)),
    _plain("hemograma completo", _TEST),
    _plain("ionograma", _TEST),
    _plain("glicemia em jejum", _TEST),
    _plain("creatinina sérica", _TEST),
    _plain("função tiroideia", _TEST),
    _plain("eletrocardiograma", _TEST),
    _plain("ecocardiograma", _TEST),
    _plain("colonoscopia", _TEST),
    _plain("endoscopia digestiva", _TEST),
    _plain("espirometria", _TEST),
    _plain("gasimetria arterial", _TEST),
    _plain("prova de esforço", _TEST),
    _plain("urocultura", _TEST),
    _plain("biópsia cutânea", _TEST),
]

_INTERVENTION = [
    _plain("apendicectomia", "interventions/surgeries"),
    _plain("colecistectomia", "interventions/surgeries"),
    _nested("artroplastia da anca", "interventions/surgeries", (2, 3, _ANAT)),
    _nested("cirurgia cardíaca", "interventions/surgeries", (1, 2, _ANAT)),
    _plain("hemodiálise", "interventions/renal_replacement_therapy"),
    _plain("quimioterapia adjuvante", "interventions/chemotherapy"),
    _plain("radioterapia paliativa", "interventions/radiotherapy"),
    _plain("fisioterapia motora", "interventions/physiotherapy"),
    _plain("ventilação não invasiva", "interventions/ventilatory_support"),
    _plain("oxigenoterapia", "interventions/ventilatory_support"),
    _plain("transfusão de concentrado eritrocitário", "interventions"),
    _plain("drenagem postural", "interventions/physiotherapy"),
]

_DEVICE = [
    _plain("pacemaker", "devices"),
    _plain("cateter venoso central", "devices"),
    _plain("sonda nasogástrica", "devices"),
    _nested("prótese da anca", "devices", (2, 3, _ANAT)),
    _nested("dreno torácico", "devices", (1, 2, _ANAT)),
    _plain("cânula nasal", "devices"),
    _plain("algália", "devices"),
    _plain("tala gessada", "devices"),
]

_ANATOMY = [_plain(s, _ANAT) for s in [
    "pulmão", "fígado", "rim esquerdo", "coração", "estômago", "baço",
    "pâncreas", "tiroide", "bexiga", "joelho direito", "ombro", "cólon",
]]

_TIME_EXPR = [
    _plain("ontem", "time/date"),
    _plain("hoje de manhã", "time/date"),
    _plain("na semana passada", "time/date"),
    _plain("há duas semanas", "time/duration"),
    _plain("há três dias", "time/duration"),
    _plain("há um mês", "time/duration"),
    _plain("durante quatro dias", "time/duration"),
    _plain("duas vezes por dia", "time/frequency"),
    _plain("uma vez por semana", "time/frequency"),
    _plain("de manhã e à noite", "time/frequency"),
]

DEFAULT_LEXICON = {
    "finding_nested": _FINDING_NESTED,
    "symptom": _SYMPTOM,
    "condition": _CONDITION,
    "medication": _MEDICATION,
    "test": _TEST_ENTRIES,
    "intervention": _INTERVENTION,
    "device": _DEVICE,
    "anatomy": _ANATOMY,
    "time_expr": _TIME_EXPR,
}

DEFAULT_TEMPLATES = [
    {"text": "Doente com {finding_nested} .", "weight": 2},
    {"text": "Sem evidência de {finding_nested} .", "weight": 1,
     "slot_modifiers": {"finding_nested": ["negation"]}},
    {"text": "Doente refere {symptom} .", "weight": 2},
    {"text": "Nega {symptom} .", "weight": 1,
     "slot_modifiers": {"symptom": ["negation"]}},
    {"text": "Antecedentes de {condition} .", "weight": 2},
    {"text": "Medicado com {medication} .", "weight": 2},
    {"text": "Iniciou {medication} {time_expr} .", "weight": 1,
     "slot_modifiers": {"medication": ["beginning"]}},
    {"text": "Suspendeu {medication} por {finding_nested} .", "weight": 1,
     "slot_modifiers": {"medication": ["suspension"]}},
    {"text": "Realizou {test} {time_expr} .", "weight": 2},
    {"text": "{test} sem alterações .", "weight": 1,
     "slot_modifiers": {"test": ["normal"]}},
    {"text": "Portador de {device} .", "weight": 1},
    {"text": "Proposto para {intervention} .", "weight": 1,
     "slot_modifiers": {"intervention": ["plan"]}},
    {"text": "Sem {symptom} ou {symptom} .", "weight": 1,
     "slot_modifiers": {"symptom": ["negation"]}},
    {"text": "{condition} diagnosticada {time_expr} .", "weight": 1},
    {"text": "Apresenta {finding_nested} e {symptom} .", "weight": 1},
    {"text": "Sem alterações em {anatomy} .", "weight": 1},
]


def default_config(sentence_count: int = 100, sentences_per_document: int = 1,
                   patients: int = 20) -> dict:
    return {
        "sentence_count": sentence_count,
        "sentences_per_document": sentences_per_document,
        "patients": patients,
        "start_date": "2019-01-01",
        "date_range_days": 730,
        "specialties": list(SPECIALTIES),
        "templates": [dict(t) for t in DEFAULT_TEMPLATES],
        "lexicon": {cat: [dict(e) for e in entries]
                    for cat, entries in DEFAULT_LEXICON.items()},
    }


def _surface_words(surface: str):
    words = surface.split(" ")
    if "" in words or surface != " ".join(words):
        raise BadConfigError(
            f"surface {surface!r} must be single-space separated words")
    return words


def _word_char_range(words, word_start: int, word_end: int):
    if not (0 <= word_start < word_end <= len(words)):
        raise BadConfigError(
            f"nested word range [{word_start},{word_end}) outside {words}")
    start = sum(len(w) + 1 for w in words[:word_start])
    end = start + len(" ".join(words[word_start:word_end]))
    return start, end


def _check_config(config: dict, ontology):
    try:
        templates = config["templates"]
        lexicon = config["lexicon"]
        sentence_count = int(config["sentence_count"])
    except (KeyError, TypeError, ValueError) as exc:
        raise BadConfigError(f"config missing or malformed: {exc}") from exc
    if sentence_count < 0:
        raise BadConfigError("sentence_count must be non-negative")
    if not templates:
        raise BadConfigError("no templates configured")
    for template in templates:
        slots = _SLOT_RE.findall(template.get("text", ""))
        if not slots:
            raise BadConfigError(f"template {template!r} has no slots")
        for category in slots:
            if category not in lexicon or not lexicon[category]:
                raise BadConfigError(
                    f"template references unknown/empty lexicon category {category!r}")
        for category, mods in template.get("slot_modifiers", {}).items():
            if category not in slots:
                raise BadConfigError(
                    f"slot_modifiers references absent slot {category!r}")
            for entry in lexicon[category]:
                node = ontology.node(entry["node"])
                bad = set(mods) - node.modifier_ids
                if bad:
                    raise BadConfigError(
                        f"modifiers {sorted(bad)} not applicable to {node.id!r} "
                        f"(category {category!r})")
    for entries in lexicon.values():
        for entry in entries:
            words = _surface_words(entry["surface"])
            ontology.node(entry["node"])
            for sub in entry.get("nested", []):
                _word_char_range(words, sub["word_start"], sub["word_end"])
                ontology.node(sub["node"])


def generate_synthetic(config: dict, seed: int, ontology) -> list:
    """Generate annotated documents; deterministic for (config, seed)."""
    _check_config(config, ontology)
    rng = random.Random(seed)
    lexicon = config["lexicon"]
    templates = config["templates"]
    weights = [int(t.get("weight", 1)) for t in templates]
    sentences_per_doc = max(1, int(config.get("sentences_per_document", 1)))
    n_patients = max(1, int(config.get("patients", 20)))
    start_date = Date.fromisoformat(config.get("start_date", "2019-01-01"))
    date_range = max(1, int(config.get("date_range_days", 730)))
    specialties = config.get("specialties", SPECIALTIES)
    noisy = config.get("noisy_annotator")

    total = int(config["sentence_count"])
    records = []
    doc_no = 0
    produced = 0
    while produced < total:
        take = min(sentences_per_doc, total - produced)
        doc_no += 1
        text_parts = []
        mention_plans = []  # (start, end, node, modifiers)
        offset = 0
        for _ in range(take):
            sentence, plans = _render_sentence(rng, templates, weights, lexicon)
            for s, e, node, mods in plans:
                mention_plans.append((offset + s, offset + e, node, mods))
            text_parts.append(sentence)
            offset += len(sentence) + 1  # newline joins sentences
        text = "\n".join(text_parts)
        doc = Document(
            id=f"doc-{doc_no:05d}",
            patient_id=f"pt-{rng.randrange(n_patients) + 1:03d}",
            date=start_date + timedelta(days=rng.randrange(date_range)),
            record_type=RECORD_TYPE_POOL[rng.randrange(len(RECORD_TYPE_POOL))],
            specialty=specialties[rng.randrange(len(specialties))],
            text=text,
        )
        gold = AnnotationSet(doc_id=doc.id, annotator_id="gold")
        # Outer-first insertion so nested sub-mentions land inside accepted spans.
        mention_plans.sort(key=lambda p: (p[0], -(p[1] - p[0])))
        for k, (s, e, node, mods) in enumerate(mention_plans, 1):
            mention = Mention(id=f"m{k}", span=Span(s, e), node_id=node,
                              modifier_ids=frozenset(mods), annotator_id="gold")
            gold = add_mention(gold, mention, ontology, doc)
        sets = [gold]
        if noisy:
            drop = float(noisy.get("drop_rate", 0.2))
            kept = tuple(m for m in gold.mentions if rng.random() >= drop)
            sets.append(AnnotationSet(doc_id=doc.id,
                                      annotator_id=noisy.get("id", "ann2"),
                                      mentions=kept))
        records.append(AnnotatedDocument(doc=doc, sets=sets))
        produced += take
    return records


def _render_sentence(rng, templates, weights, lexicon):
    """One sentence plus its mention plans (char offsets local to the sentence)."""
    template = rng.choices(templates, weights=weights, k=1)[0]
    slot_modifiers = template.get("slot_modifiers", {})
    used = {}  # category -> set of entry indexes already used in this sentence
    parts = []
    plans = []
    pos = 0
    cursor = 0
    text = template["text"]
    for match in _SLOT_RE.finditer(text):
        literal = text[cursor:match.start()]
        parts.append(literal)
        pos += len(literal)
        category = match.group(1)
        entries = lexicon[category]
        taken = used.setdefault(category, set())
        choices = [i for i in range(len(entries)) if i not in taken]
        if not choices:  # category exhausted within one sentence; allow repeats
            choices = list(range(len(entries)))
        idx = choices[rng.randrange(len(choices))]
        taken.add(idx)
        entry = entries[idx]
        surface = entry["surface"]
        words = surface.split(" ")
        mods = slot_modifiers.get(category, [])
        plans.append((pos, pos + len(surface), entry["node"], mods))
        for sub in entry.get("nested", []):
            ws, we = _word_char_range(words, sub["word_start"], sub["word_end"])
            plans.append((pos + ws, pos + we, sub["node"], []))
        parts.append(surface)
        pos += len(surface)
        cursor = match.end()
    tail = text[cursor:]
    parts.append(tail)
    return "".join(parts), plans
