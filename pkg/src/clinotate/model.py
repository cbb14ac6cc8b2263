"""Learnable action scorer over parser states: sparse averaged perceptron.

Training walks the deterministic oracle path for every sentence and
updates on each divergence (the model's wrong prediction is punished, the
oracle action rewarded), staying on the oracle path afterwards. Updates
for LABEL steps are scaled so that outer mentions weigh more than deeply
nested ones.

Everything is deterministic given (data, hyperparams, seed): one seeded
PRNG drives epoch shuffling and nothing else is random.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field

from . import corpus as corpus_mod
from . import transitions as tr
from .errors import (
    EmptyCorpusError,
    FormatError,
    OntologyMismatchError,
    TerminalStateError,
    UnknownNodeError,
    VersionMismatchError,
)
from .ontology import level1_roots

log = logging.getLogger(__name__)

MODEL_MAGIC = "clinotate-model 1"


@dataclass(frozen=True)
class Hyperparams:
    epochs: int = 5
    beam_width: int = 1
    depth_weight_alpha: float = 0.5
    seed: int = 0
    averaging: bool = True

    def to_json(self) -> str:
        return json.dumps({
            "epochs": self.epochs, "beam_width": self.beam_width,
            "depth_weight_alpha": self.depth_weight_alpha,
            "seed": self.seed, "averaging": self.averaging,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Hyperparams":
        data = json.loads(text)
        return cls(epochs=int(data["epochs"]), beam_width=int(data["beam_width"]),
                   depth_weight_alpha=float(data["depth_weight_alpha"]),
                   seed=int(data["seed"]), averaging=bool(data["averaging"]))


@dataclass
class Model:
    action_weights: dict       # feature -> {action key -> weight}
    modifier_weights: dict     # feature -> {modifier id -> weight}
    ontology_version: str
    hyperparams: Hyperparams
    dev_history: list = field(default_factory=list, compare=False)


# ---------------------------------------------------------------------------
# Features

def word_shape(form: str) -> str:
    """Capitalization/digit pattern with runs collapsed (e.g. "Abc1" -> "Xxd")."""
    out = []
    for ch in form:
        if ch.isdigit():
            cls = "d"
        elif ch.isalpha():
            cls = "X" if ch.isupper() else "x"
        else:
            cls = ch
        if not out or out[-1] != cls:
            out.append(cls)
    return "".join(out)


def _len_bucket(n: int) -> str:
    return str(n) if n < 4 else "4+"


def featurize(state: tr.ParserState, tokens) -> dict:
    """Indicator features of a parser configuration; deterministic."""
    if state.done:
        raise TerminalStateError("cannot featurize a terminal state")
    feats = {"bias": 1.0}
    for i in range(3):
        pos = state.buffer_pos + i
        if pos < len(tokens):
            form = tokens[pos].form
            feats[f"buf{i}={form}"] = 1.0
            feats[f"buf{i}_lc={form.lower()}"] = 1.0
            if i < 2:
                feats[f"buf{i}_shape={word_shape(form)}"] = 1.0
        else:
            feats[f"buf{i}=</s>"] = 1.0
    for name, seg in (("stktop", state.stack[-1] if state.stack else None),
                      ("stk2", state.stack[-2] if len(state.stack) >= 2 else None)):
        if seg is None:
            feats[f"{name}=<none>"] = 1.0
        else:
            feats[f"{name}_first={tokens[seg[0]].form}"] = 1.0
            feats[f"{name}_last={tokens[seg[1] - 1].form}"] = 1.0
            feats[f"{name}_len={_len_bucket(seg[1] - seg[0])}"] = 1.0
    if state.stack:
        top = state.stack[-1]
        for rng, node_id in state.emitted:
            if rng == top:
                feats[f"emitted_top={node_id}"] = 1.0
    feats[f"stklen={_len_bucket(len(state.stack))}"] = 1.0
    feats[f"prev={state.last_action or '<init>'}"] = 1.0
    return feats


def modifier_features(tokens, trange, node_id, ontology) -> dict:
    """Window, internal and class features for per-mention modifier scoring."""
    s, e = trange
    feats = {"bias": 1.0}
    for d in (1, 2, 3):
        if s - d >= 0:
            feats[f"l{d}={tokens[s - d].form}"] = 1.0
        if e - 1 + d < len(tokens):
            feats[f"r{d}={tokens[e - 1 + d].form}"] = 1.0
    for tok in tokens[s:e]:
        feats[f"in={tok.form}"] = 1.0
    for root in sorted(level1_roots(ontology, node_id)):
        feats[f"root={root}"] = 1.0
    return feats


# ---------------------------------------------------------------------------
# Scoring

def score_actions(weights: dict, feats: dict) -> dict:
    scores = {}
    for f in feats:
        per_action = weights.get(f)
        if per_action:
            for key, w in per_action.items():
                scores[key] = scores.get(key, 0.0) + w
    return scores


def _argmax(scores: dict, candidates) -> tr.Action:
    """Highest-scoring candidate; candidates arrive in fixed tie-break order."""
    best = None
    best_score = 0.0
    for a in candidates:
        s = scores.get(a.key, 0.0)
        if best is None or s > best_score:
            best, best_score = a, s
    return best


# ---------------------------------------------------------------------------
# Training data preparation

@dataclass
class TrainingSentence:
    tokens: list               # Token objects, original char spans preserved
    gold: list                 # ((start, end) token range, node_id)
    gold_mentions: list        # (token range, node_id, frozenset modifiers)


def prepare_sentences(records, ontology, annotator: str = "gold") -> list:
    """Slice documents into per-sentence training units with token-range gold.

    Char spans that do not align to token boundaries are snapped outward
    (with a logged warning); mentions straddling a sentence boundary are
    dropped, likewise with a warning.
    """
    sentences = []
    for record in records:
        doc = record.doc
        aset = record.annotation_set(annotator)
        mentions = aset.mentions if aset else ()
        tokens = corpus_mod.tokenize(doc.text)
        placed = []
        for m in mentions:
            try:
                ontology.node(m.node_id)
            except UnknownNodeError as exc:
                raise OntologyMismatchError(
                    f"{doc.id}/{m.id}: {exc.detail}") from exc
            trange = corpus_mod.snap_to_tokens(tokens, m.span)
            if trange is None:
                log.warning("%s/%s: span covers no token, dropped", doc.id, m.id)
                continue
            placed.append((trange, m))
        for ts, te in corpus_mod.sentence_ranges(doc.text, tokens):
            sent_tokens = tokens[ts:te]
            gold, gold_mentions = [], []
            for (ms, me), m in placed:
                if ms >= ts and me <= te:
                    rng = (ms - ts, me - ts)
                    gold.append((rng, m.node_id))
                    gold_mentions.append((rng, m.node_id, m.modifier_ids))
                elif ms < te and me > ts:
                    log.warning("%s/%s: mention straddles a sentence boundary, dropped",
                                doc.id, m.id)
            sentences.append(TrainingSentence(sent_tokens, gold, gold_mentions))
    return sentences


# ---------------------------------------------------------------------------
# Averaged weights

class _Averaged:
    """Sparse weights with the lazy running-total trick for averaging."""

    def __init__(self):
        self.weights = {}   # feature -> {key -> w}
        self._totals = {}   # feature -> {key -> accumulated w*steps}
        self._stamp = {}    # feature -> {key -> last step touched}
        self.step = 0

    def update(self, feats, key: str, delta: float):
        for f in feats:
            wf = self.weights.setdefault(f, {})
            tf = self._totals.setdefault(f, {})
            sf = self._stamp.setdefault(f, {})
            w = wf.get(key, 0.0)
            tf[key] = tf.get(key, 0.0) + (self.step - sf.get(key, 0)) * w
            sf[key] = self.step
            wf[key] = w + delta

    def raw(self) -> dict:
        return {f: dict(per) for f, per in self.weights.items() if per}

    def averaged(self) -> dict:
        n = max(self.step, 1)
        out = {}
        for f, per in self.weights.items():
            row = {}
            for key, w in per.items():
                total = self._totals[f].get(key, 0.0) + (self.step - self._stamp[f].get(key, 0)) * w
                avg = total / n
                if avg != 0.0:
                    row[key] = avg
            if row:
                out[f] = row
        return out

    def snapshot(self, averaging: bool) -> dict:
        return self.averaged() if averaging else self.raw()


# ---------------------------------------------------------------------------
# Training

def _oracle_steps(sentence: TrainingSentence, alpha: float):
    """Cacheable (features, candidate keys..., oracle key, update scale) steps."""
    actions = tr.oracle_actions(sentence.tokens, sentence.gold)
    depths = tr.mention_depths(sentence.gold)
    max_depth = max(depths.values(), default=0)
    steps = []
    state = tr.initial_state(sentence.tokens)
    for action in actions:
        feats = featurize(state, sentence.tokens)
        if action.kind == tr.LABEL:
            scale = 1.0 + alpha * (max_depth - depths[state.stack[-1]])
        else:
            scale = 1.0
        steps.append((feats, state, action, scale))
        state = tr.apply(state, action)
    return steps


def train(train_corpus, dev_corpus, ontology, hp: Hyperparams = Hyperparams(),
          annotator: str = "gold") -> Model:
    """Averaged-perceptron training over oracle action sequences.

    Returns the best-dev-epoch model; ``model.dev_history`` carries the
    per-epoch dev micro-F1 values that are also logged.
    """
    train_sents = prepare_sentences(train_corpus, ontology, annotator)
    dev_sents = prepare_sentences(dev_corpus, ontology, annotator)
    if not train_sents:
        raise EmptyCorpusError("no training sentences")
    node_ids = sorted(ontology.nodes)

    cached = [_oracle_steps(s, hp.depth_weight_alpha) for s in train_sents]

    actions_av = _Averaged()
    mods_av = _Averaged()
    rng = random.Random(hp.seed)
    order = list(range(len(train_sents)))

    best = None
    history = []
    for epoch in range(1, hp.epochs + 1):
        rng.shuffle(order)
        n_err = 0
        for idx in order:
            for feats, state, oracle_action, scale in cached[idx]:
                actions_av.step += 1
                scores = score_actions(actions_av.weights, feats)
                predicted = _argmax(scores, tr.valid_actions(state, node_ids))
                if predicted.key != oracle_action.key:
                    actions_av.update(feats, oracle_action.key, scale)
                    actions_av.update(feats, predicted.key, -scale)
                    n_err += 1
            sent = train_sents[idx]
            for rng_pair, node_id, gold_mods in sent.gold_mentions:
                feats = modifier_features(sent.tokens, rng_pair, node_id, ontology)
                applicable = sorted(ontology.node(node_id).modifier_ids)
                for mod_id in applicable:
                    mods_av.step += 1
                    score = sum(mods_av.weights.get(f, {}).get(mod_id, 0.0)
                                for f in feats)
                    target = mod_id in gold_mods
                    if (score > 0.0) != target:
                        mods_av.update(feats, mod_id, 1.0 if target else -1.0)

        candidate = Model(action_weights=actions_av.snapshot(hp.averaging),
                          modifier_weights=mods_av.snapshot(hp.averaging),
                          ontology_version=ontology.version, hyperparams=hp)
        f1 = _dev_micro_f1(candidate, dev_sents, ontology)
        history.append(f1)
        log.info("epoch %d: %d action errors, dev micro-F1 %.4f", epoch, n_err, f1)
        if best is None or f1 > best[0]:
            best = (f1, candidate)

    model = best[1]
    model.dev_history = history
    return model


def _dev_micro_f1(model: Model, sentences, ontology) -> float:
    n_gold = n_pred = n_correct = 0
    for sent in sentences:
        emitted = decode(model, sent.tokens, ontology)
        gold = set(sent.gold)
        n_gold += len(gold)
        n_pred += len(emitted)
        n_correct += len(set(emitted) & gold)
    if n_pred == 0 or n_gold == 0 or n_correct == 0:
        return 0.0
    p = n_correct / n_pred
    r = n_correct / n_gold
    return 2 * p * r / (p + r)


# ---------------------------------------------------------------------------
# Decoding

def _beam_decode(model: Model, tokens, ontology, width: int):
    """Beam search over valid actions; returns (score, state, actions).

    Ties break on (cumulative score, insertion order), and insertion order
    follows the fixed action order, so decoding is deterministic.
    """
    node_ids = sorted(ontology.nodes)
    beams = [(0.0, tr.initial_state(tokens), ())]
    while any(not state.done for _, state, _ in beams):
        expanded = []
        for score, state, path in beams:
            if state.done:
                expanded.append((score, state, path))
                continue
            feats = featurize(state, tokens)
            action_scores = score_actions(model.action_weights, feats)
            for action in tr.valid_actions(state, node_ids):
                expanded.append((score + action_scores.get(action.key, 0.0),
                                 tr.apply(state, action), path + (action,)))
        expanded.sort(key=lambda item: -item[0])  # stable: keeps insertion order on ties
        beams = expanded[:width]
    return beams[0]


def decode(model: Model, tokens, ontology, width: int | None = None) -> list:
    """Emitted (token range, node) pairs of the best decode path.

    Width defaults to the model's hyperparams; width 1 is plain greedy.
    """
    if not tokens:
        return []
    width = max(1, model.hyperparams.beam_width if width is None else width)
    return list(_beam_decode(model, tokens, ontology, width)[1].emitted)


def decode_score(model: Model, tokens, ontology, width: int | None = None) -> float:
    """Cumulative score of the best terminal decode path (for diagnostics)."""
    if not tokens:
        return 0.0
    width = max(1, model.hyperparams.beam_width if width is None else width)
    return _beam_decode(model, tokens, ontology, width)[0]


def decode_trace(model: Model, tokens, ontology, width: int | None = None):
    """(emitted pairs, action sequence) of the best decode path."""
    if not tokens:
        return [], []
    width = max(1, model.hyperparams.beam_width if width is None else width)
    _, state, path = _beam_decode(model, tokens, ontology, width)
    return list(state.emitted), list(path)


def classify_modifiers(model: Model, mention, tokens, ontology) -> frozenset:
    """Independent binary scoring per applicable modifier (threshold 0, strict).

    Modifiers outside the node's applicability set are never emitted,
    whatever the weights say.
    """
    node = ontology.node(mention.node_id)
    trange = corpus_mod.snap_to_tokens(tokens, mention.span)
    if trange is None:
        return frozenset()
    feats = modifier_features(tokens, trange, mention.node_id, ontology)
    out = set()
    for mod_id in sorted(node.modifier_ids):
        score = sum(model.modifier_weights.get(f, {}).get(mod_id, 0.0) for f in feats)
        if score > 0.0:
            out.add(mod_id)
    return frozenset(out)


def predict(model: Model, tokens, ontology) -> list:
    """Decode one token sequence into char-span mentions with modifiers."""
    if model.ontology_version != ontology.version:
        raise OntologyMismatchError(
            f"model was trained against catalog {model.ontology_version!r}, "
            f"loaded catalog is {ontology.version!r}")
    emitted = decode(model, tokens, ontology)
    emitted.sort(key=lambda it: (it[0], it[1]))
    mentions = []
    for i, (trange, node_id) in enumerate(emitted, 1):
        span = corpus_mod.span_for_token_range(tokens, trange)
        stub = corpus_mod.Mention(id=f"p{i}", span=span, node_id=node_id,
                                  annotator_id="predicted")
        mods = classify_modifiers(model, stub, tokens, ontology)
        mentions.append(corpus_mod.Mention(id=f"p{i}", span=span, node_id=node_id,
                                           modifier_ids=mods,
                                           annotator_id="predicted"))
    return mentions


def predict_document(model: Model, text: str, ontology) -> list:
    """Tokenize, decode sentence by sentence, return document-level mentions."""
    from dataclasses import replace

    tokens = corpus_mod.tokenize(text)
    mentions = []
    for ts, te in corpus_mod.sentence_ranges(text, tokens):
        mentions.extend(predict(model, tokens[ts:te], ontology))
    return [replace(m, id=f"p{i}") for i, m in enumerate(mentions, 1)]


# ---------------------------------------------------------------------------
# Persistence: versioned UTF-8 text, bit-exact round-trip

def save_model(model: Model, sink):
    """Write the model; `sink` is a path or a text file object."""
    if hasattr(sink, "write"):
        _write_model(model, sink)
    else:
        with open(sink, "w", encoding="utf-8") as fh:
            _write_model(model, fh)


def _weight_lines(tag: str, weights: dict):
    lines = []
    for feature, per_key in weights.items():
        for key, value in per_key.items():
            lines.append(f"{tag}\t{feature}\t{key}\t{value!r}")
    lines.sort()
    return lines


def _write_model(model: Model, fh):
    a_lines = _weight_lines("A", model.action_weights)
    m_lines = _weight_lines("M", model.modifier_weights)
    fh.write(MODEL_MAGIC + "\n")
    fh.write(f"ontology_version {model.ontology_version}\n")
    fh.write(f"hyperparams {model.hyperparams.to_json()}\n")
    fh.write(f"counts {len(a_lines)} {len(m_lines)}\n")
    for line in a_lines + m_lines:
        fh.write(line + "\n")


def load_model(source, expected_ontology_version: str | None = None,
               force: bool = False) -> Model:
    """Read a model file; refuses catalog-version mismatches unless forced."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    lines = text.splitlines()
    if len(lines) < 4 or lines[0] != MODEL_MAGIC:
        raise FormatError("not a clinotate model file")
    if not lines[1].startswith("ontology_version "):
        raise FormatError("missing ontology_version header")
    ontology_version = lines[1][len("ontology_version "):]
    if not lines[2].startswith("hyperparams "):
        raise FormatError("missing hyperparams header")
    try:
        hp = Hyperparams.from_json(lines[2][len("hyperparams "):])
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise FormatError(f"bad hyperparams header: {exc}") from exc
    if not lines[3].startswith("counts "):
        raise FormatError("missing counts header")
    try:
        n_a, n_m = (int(x) for x in lines[3].split()[1:])
    except ValueError as exc:
        raise FormatError("bad counts header") from exc
    body = lines[4:]
    if len(body) != n_a + n_m:
        raise FormatError(
            f"expected {n_a + n_m} weight lines, found {len(body)} (truncated?)")
    action_weights, modifier_weights = {}, {}
    for line in body:
        parts = line.split("\t")
        if len(parts) != 4 or parts[0] not in ("A", "M"):
            raise FormatError(f"malformed weight line {line!r}")
        tag, feature, key, value = parts
        try:
            w = float(value)
        except ValueError as exc:
            raise FormatError(f"bad weight value in {line!r}") from exc
        target = action_weights if tag == "A" else modifier_weights
        target.setdefault(feature, {})[key] = w
    if (expected_ontology_version is not None
            and ontology_version != expected_ontology_version and not force):
        raise VersionMismatchError(
            f"model catalog version {ontology_version!r} does not match "
            f"{expected_ontology_version!r} (use force to override)")
    return Model(action_weights=action_weights, modifier_weights=modifier_weights,
                 ontology_version=ontology_version, hyperparams=hp)
