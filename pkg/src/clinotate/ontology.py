"""Clinical ontology catalog: classes, 3-level poly-hierarchy, modifiers.

The catalog is data, not code: it ships as a versioned JSON file (see
``data/seed_catalog.json``) and everything here operates on the loaded,
immutable ``Ontology`` value. Ontology values are safe to share across
threads after loading.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .errors import ParseError, UnknownNodeError, ValidationError

# The closed modifier inventory. A catalog must declare exactly these.
MODIFIER_IDS = frozenset({
    "negation", "plan", "acute", "chronic", "worsened", "probable_possible",
    "normal", "augmented", "diminished", "beginning", "suspension",
    "ongoing", "past",
})

# Modifiers that may only appear inside the interventions subtree.
INTERVENTION_ONLY = frozenset({"beginning", "suspension", "ongoing", "past"})

UNIVERSAL = "universal"

# Fixed Latin-1 / Latin Extended-A folding table. Kept as explicit data so
# ranking is identical on every platform regardless of unicodedata version.
_FOLD_TABLE = str.maketrans({
    "à": "a", "á": "a", "â": "a", "ã": "a", "ä": "a", "å": "a", "ā": "a", "ă": "a", "ą": "a",
    "ç": "c", "ć": "c", "ĉ": "c", "č": "c",
    "è": "e", "é": "e", "ê": "e", "ë": "e", "ē": "e", "ĕ": "e", "ė": "e", "ę": "e", "ě": "e",
    "ì": "i", "í": "i", "î": "i", "ï": "i", "ĩ": "i", "ī": "i", "į": "i",
    "ñ": "n", "ń": "n", "ň": "n",
    "ò": "o", "ó": "o", "ô": "o", "õ": "o", "ö": "o", "ō": "o", "ő": "o",
    "ù": "u", "ú": "u", "û": "u", "ü": "u", "ũ": "u", "ū": "u", "ů": "u",
    "ý": "y", "ÿ": "y",
    "š": "s", "ś": "s", "ž": "z", "ź": "z", "ż": "z",
    "æ": "ae", "œ": "oe", "ß": "ss", "ð": "d", "þ": "th", "ł": "l",
})


def fold(text: str) -> str:
    """Lowercase and strip diacritics via the fixed folding table."""
    return text.lower().translate(_FOLD_TABLE)


@dataclass(frozen=True)
class Modifier:
    id: str
    label: str
    # Either UNIVERSAL or a frozenset of level-1 node ids.
    scope: str | frozenset


@dataclass(frozen=True)
class OntologyNode:
    id: str
    label: str
    level: int
    parent_ids: tuple
    # Applicable modifiers, resolved (universal + scoped via level-1 roots).
    modifier_ids: frozenset = field(default_factory=frozenset)


@dataclass(frozen=True)
class Ontology:
    nodes: dict
    modifiers: dict
    version: str

    def node(self, node_id: str) -> OntologyNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNodeError(f"unknown ontology node {node_id!r}") from None


@dataclass(frozen=True)
class Violation:
    subject: str  # node or modifier id (or "catalog" for global rules)
    rule: str
    message: str

    def __str__(self):
        return f"{self.subject}: {self.rule}: {self.message}"


def _parse_catalog(raw) -> tuple[dict, dict, str]:
    """Parse the catalog document into raw node/modifier maps, no validation."""
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"catalog is not UTF-8: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"catalog is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("catalog root must be a JSON object")
    for key in ("version", "modifiers", "nodes"):
        if key not in doc:
            raise ParseError(f"catalog is missing the {key!r} key")
    if not isinstance(doc["version"], str):
        raise ParseError("catalog version must be a string")

    modifiers = {}
    for entry in doc["modifiers"]:
        try:
            scope = entry["scope"]
            if scope == UNIVERSAL:
                parsed_scope = UNIVERSAL
            elif isinstance(scope, list):
                parsed_scope = frozenset(scope)
            else:
                raise ParseError(
                    f"modifier {entry.get('id')!r} scope must be "
                    f"'universal' or a list of level-1 node ids")
            mod = Modifier(id=entry["id"], label=entry["label"], scope=parsed_scope)
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed modifier entry {entry!r}") from exc
        if mod.id in modifiers:
            raise ParseError(f"duplicate modifier id {mod.id!r}")
        modifiers[mod.id] = mod

    nodes = {}
    for entry in doc["nodes"]:
        try:
            node = OntologyNode(
                id=entry["id"],
                label=entry["label"],
                level=int(entry["level"]),
                parent_ids=tuple(entry["parents"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed node entry {entry!r}") from exc
        if node.id in nodes:
            raise ParseError(f"duplicate node id {node.id!r}")
        nodes[node.id] = node
    return nodes, modifiers, doc["version"]


def build_ontology(raw) -> Ontology:
    """Parse a catalog document into an Ontology without validating it.

    Used by ``validate`` tests to construct intentionally broken catalogs;
    modifier applicability is resolved only for nodes whose ancestry is
    well-formed.
    """
    nodes, modifiers, version = _parse_catalog(raw)
    resolved = {}
    for node in nodes.values():
        roots = _level1_roots(nodes, node.id)
        applicable = set()
        for mod in modifiers.values():
            if mod.scope == UNIVERSAL or (isinstance(mod.scope, frozenset) and roots & mod.scope):
                applicable.add(mod.id)
        resolved[node.id] = OntologyNode(
            id=node.id, label=node.label, level=node.level,
            parent_ids=node.parent_ids, modifier_ids=frozenset(applicable))
    return Ontology(nodes=resolved, modifiers=modifiers, version=version)


def _level1_roots(nodes: dict, node_id: str) -> set:
    """Level-1 roots reachable from a node; a level-1 node is its own root.

    Tolerates broken graphs (missing parents, cycles) by visiting each node
    at most once, so it is safe to call during validation.
    """
    roots = set()
    seen = set()
    stack = [node_id]
    while stack:
        cur = stack.pop()
        if cur in seen or cur not in nodes:
            continue
        seen.add(cur)
        node = nodes[cur]
        if node.level == 1:
            roots.add(cur)
        stack.extend(node.parent_ids)
    return roots


def load_catalog(raw) -> Ontology:
    """Load and validate a catalog document (bytes or str).

    Raises ParseError on malformed input and ValidationError (carrying the
    violation list) when the catalog breaks an ontology invariant.
    """
    ontology = build_ontology(raw)
    violations = validate(ontology)
    if violations:
        raise ValidationError(violations)
    return ontology


def seed_catalog() -> Ontology:
    """The catalog shipped with the package (every class the guidelines name)."""
    data = resources.files("clinotate.data").joinpath("seed_catalog.json").read_bytes()
    return load_catalog(data)


def serialize(ontology: Ontology) -> bytes:
    """Render an ontology back to the catalog file format (UTF-8 JSON)."""
    doc = {
        "version": ontology.version,
        "modifiers": [
            {
                "id": m.id,
                "label": m.label,
                "scope": UNIVERSAL if m.scope == UNIVERSAL else sorted(m.scope),
            }
            for m in sorted(ontology.modifiers.values(), key=lambda m: m.id)
        ],
        "nodes": [
            {
                "id": n.id,
                "label": n.label,
                "level": n.level,
                "parents": list(n.parent_ids),
            }
            for n in sorted(ontology.nodes.values(), key=lambda n: n.id)
        ],
    }
    return json.dumps(doc, ensure_ascii=False, indent=2).encode("utf-8")


def validate(ontology: Ontology) -> list:
    """Check every catalog invariant; returns violations, sorted and stable.

    An empty list means ``load_catalog`` would accept the serialized form.
    """
    out = []
    nodes = ontology.nodes

    for node in nodes.values():
        if not (1 <= node.level <= 3):
            out.append(Violation(node.id, "level out of range",
                                 f"level {node.level} not in 1..3"))
        if node.level == 1 and node.parent_ids:
            out.append(Violation(node.id, "root with parents",
                                 "level-1 nodes must not declare parents"))
        if node.level > 1 and not node.parent_ids:
            out.append(Violation(node.id, "missing parents",
                                 f"level-{node.level} node has no parent"))
        if len(set(node.parent_ids)) != len(node.parent_ids):
            out.append(Violation(node.id, "duplicate parent",
                                 "parent list repeats an id"))
        for pid in node.parent_ids:
            parent = nodes.get(pid)
            if parent is None:
                out.append(Violation(node.id, "unknown parent",
                                     f"parent {pid!r} is not in the catalog"))
            elif parent.level != node.level - 1:
                out.append(Violation(node.id, "parent level mismatch",
                                     f"parent {pid!r} has level {parent.level}, "
                                     f"expected {node.level - 1}"))

    # Cycle detection over parent edges (white/grey/black DFS).
    color = {}
    def visit(nid, trail):
        color[nid] = "grey"
        for pid in nodes[nid].parent_ids:
            if pid not in nodes:
                continue
            c = color.get(pid)
            if c == "grey":
                out.append(Violation(nid, "cycle",
                                     "ancestor chain loops back through "
                                     + " -> ".join(trail + [pid])))
            elif c is None:
                visit(pid, trail + [pid])
        color[nid] = "black"

    for nid in nodes:
        if nid not in color:
            visit(nid, [nid])

    # Reachability: every node must sit under at least one level-1 root.
    for node in nodes.values():
        if not _level1_roots(nodes, node.id):
            out.append(Violation(node.id, "unreachable",
                                 "no level-1 ancestor reachable"))

    level1 = {n.id for n in nodes.values() if n.level == 1}
    mods = ontology.modifiers
    missing = MODIFIER_IDS - set(mods)
    extra = set(mods) - MODIFIER_IDS
    for mid in sorted(missing):
        out.append(Violation(mid, "modifier catalog mismatch",
                             "required modifier missing from catalog"))
    for mid in sorted(extra):
        out.append(Violation(mid, "modifier catalog mismatch",
                             "modifier not in the fixed inventory"))
    for mod in mods.values():
        if mod.id == "negation" and mod.scope != UNIVERSAL:
            out.append(Violation(mod.id, "negation not universal",
                                 "negation must apply to every category"))
        if mod.id in INTERVENTION_ONLY and mod.scope != frozenset({"interventions"}):
            out.append(Violation(mod.id, "restricted modifier scope",
                                 "must be scoped to exactly {interventions}"))
        if isinstance(mod.scope, frozenset):
            for nid in sorted(mod.scope - level1):
                out.append(Violation(mod.id, "scope not level-1",
                                     f"scope entry {nid!r} is not a level-1 node"))

    out.sort(key=lambda v: (v.subject, v.rule, v.message))
    return out


def ancestors(ontology: Ontology, node_id: str) -> set:
    """Transitive closure over parents, excluding the node itself."""
    ontology.node(node_id)
    seen = set()
    stack = list(ontology.nodes[node_id].parent_ids)
    while stack:
        cur = stack.pop()
        if cur in seen or cur not in ontology.nodes:
            continue
        seen.add(cur)
        stack.extend(ontology.nodes[cur].parent_ids)
    return seen


def descendants(ontology: Ontology, node_id: str) -> set:
    """All nodes whose ancestor set contains node_id (exclusive)."""
    ontology.node(node_id)
    return {nid for nid in ontology.nodes
            if nid != node_id and node_id in ancestors(ontology, nid)}


def level1_roots(ontology: Ontology, node_id: str) -> set:
    """Level-1 roots of a node; a level-1 node is its own root."""
    ontology.node(node_id)
    return _level1_roots(ontology.nodes, node_id)


def applicable_modifiers(ontology: Ontology, node_id: str) -> frozenset:
    """Modifiers usable at a node: universal ones plus those whose scope
    contains any of the node's level-1 roots."""
    return ontology.node(node_id).modifier_ids


def search(ontology: Ontology, query: str) -> list:
    """Rank nodes for a search-box query.

    Case- and diacritic-insensitive substring match over labels and ids;
    exact label match ranks first, then prefix matches, then plain
    substrings, ties broken by node id. Empty query yields nothing.
    """
    q = fold(query.strip())
    if not q:
        return []
    ranked = []
    for node in ontology.nodes.values():
        label = fold(node.label)
        nid = fold(node.id)
        if q == label or q == nid:
            rank = 0
        elif label.startswith(q) or nid.startswith(q):
            rank = 1
        elif q in label or q in nid:
            rank = 2
        else:
            continue
        ranked.append((rank, node.id))
    ranked.sort()
    return [nid for _, nid in ranked]
