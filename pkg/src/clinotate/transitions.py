"""Transition system for nested, hierarchical mention recognition.

A configuration holds a stack of contiguous token-range segments, a buffer
position and the mentions emitted so far. Four actions drive it:

  SHIFT     push the next token as a one-token segment
  MERGE     fuse the top two segments (they must be adjacent)
  LABEL(n)  emit (top segment, n); the segment stays on the stack, so the
            same span can take further labels and later merge into an
            outer mention - this is what yields nesting
  POP       discard the top segment

Crossing mentions are unrepresentable by construction: tokens fused into a
segment only ever travel together afterwards, so any two emitted ranges
are disjoint or nested.

States are immutable; ``apply`` returns a new state, which makes parsing
distinct sentences embarrassingly parallel.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import (
    CrossingGoldError,
    InvalidActionError,
    NotDerivableError,
    TerminalStateError,
)

SHIFT = "SHIFT"
MERGE = "MERGE"
LABEL = "LABEL"
POP = "POP"

# Fixed tie-break order for decoding; keys sort by (kind rank, node id).
_KIND_RANK = {SHIFT: 0, MERGE: 1, LABEL: 2, POP: 3}


@dataclass(frozen=True)
class Action:
    kind: str
    node_id: str | None = None

    def __post_init__(self):
        if self.kind not in _KIND_RANK:
            raise InvalidActionError(f"unknown action kind {self.kind!r}")
        if (self.kind == LABEL) != (self.node_id is not None):
            raise InvalidActionError("LABEL takes a node id, other actions do not")

    @property
    def key(self) -> str:
        return f"LABEL:{self.node_id}" if self.kind == LABEL else self.kind

    def sort_key(self):
        return (_KIND_RANK[self.kind], self.node_id or "")


SHIFT_ACTION = Action(SHIFT)
MERGE_ACTION = Action(MERGE)
POP_ACTION = Action(POP)


def label(node_id: str) -> Action:
    return Action(LABEL, node_id)


def action_from_key(key: str) -> Action:
    if key.startswith("LABEL:"):
        return label(key[len("LABEL:"):])
    return Action(key)


def actions_to_str(actions) -> str:
    """Debug/trace serialization: whitespace-separated action keys."""
    return " ".join(a.key for a in actions)


def actions_from_str(text: str) -> list:
    return [action_from_key(key) for key in text.split()]


@dataclass(frozen=True)
class ParserState:
    n_tokens: int
    stack: tuple = ()      # ((start, end), ...) left-to-right, non-overlapping
    buffer_pos: int = 0
    emitted: tuple = ()    # (((start, end), node_id), ...)
    last_action: str | None = field(default=None, compare=False)

    @property
    def done(self) -> bool:
        return self.buffer_pos >= self.n_tokens and not self.stack


def initial_state(tokens) -> ParserState:
    return ParserState(n_tokens=len(tokens))


def valid_kinds(state: ParserState) -> set:
    """Action kinds applicable in this state (LABEL subject to the
    per-node duplicate rule checked by ``is_valid``)."""
    if state.done:
        raise TerminalStateError("state is terminal")
    kinds = set()
    if state.buffer_pos < state.n_tokens:
        kinds.add(SHIFT)
    if len(state.stack) >= 2 and state.stack[-2][1] == state.stack[-1][0]:
        kinds.add(MERGE)
    if state.stack:
        kinds.add(LABEL)
        kinds.add(POP)
    return kinds


def is_valid(state: ParserState, action: Action) -> bool:
    if state.done:
        return False
    if action.kind == SHIFT:
        return state.buffer_pos < state.n_tokens
    if action.kind == MERGE:
        return len(state.stack) >= 2 and state.stack[-2][1] == state.stack[-1][0]
    if action.kind == POP:
        return bool(state.stack)
    # LABEL: top segment must exist and not already carry this node.
    if not state.stack:
        return False
    top = state.stack[-1]
    return (top, action.node_id) not in state.emitted


def valid_actions(state: ParserState, node_ids) -> list:
    """Concrete candidate actions for decoding, in fixed tie-break order."""
    if state.done:
        raise TerminalStateError("state is terminal")
    out = []
    if state.buffer_pos < state.n_tokens:
        out.append(SHIFT_ACTION)
    if len(state.stack) >= 2 and state.stack[-2][1] == state.stack[-1][0]:
        out.append(MERGE_ACTION)
    if state.stack:
        top = state.stack[-1]
        for nid in node_ids:
            if (top, nid) not in state.emitted:
                out.append(label(nid))
        out.append(POP_ACTION)
    return out


def apply(state: ParserState, action: Action) -> ParserState:
    """Pure transition; raises InvalidAction unless ``is_valid`` holds."""
    if not is_valid(state, action):
        raise InvalidActionError(
            f"action {action.key} invalid in state "
            f"(stack={state.stack}, buffer_pos={state.buffer_pos}, done={state.done})")
    if action.kind == SHIFT:
        seg = (state.buffer_pos, state.buffer_pos + 1)
        return replace(state, stack=state.stack + (seg,),
                       buffer_pos=state.buffer_pos + 1, last_action=SHIFT)
    if action.kind == MERGE:
        lo, hi = state.stack[-2], state.stack[-1]
        return replace(state, stack=state.stack[:-2] + ((lo[0], hi[1]),),
                       last_action=MERGE)
    if action.kind == LABEL:
        entry = (state.stack[-1], action.node_id)
        return replace(state, emitted=state.emitted + (entry,), last_action=LABEL)
    return replace(state, stack=state.stack[:-1], last_action=POP)


def replay(tokens, actions) -> ParserState:
    state = initial_state(tokens)
    for action in actions:
        state = apply(state, action)
    return state


# ---------------------------------------------------------------------------
# Deterministic oracle

def _contains(outer, inner) -> bool:
    return outer[0] <= inner[0] and inner[1] <= outer[1]


def _crosses(a, b) -> bool:
    return a[0] < b[1] and b[0] < a[1] and not _contains(a, b) and not _contains(b, a)


def check_gold(tokens, gold):
    """Validate a gold mention list: in-bounds, token-aligned, crossing-free.

    Returns the deduplicated (range, node) set and the per-range label map.
    """
    n = len(tokens)
    pairs = set()
    for rng, node_id in gold:
        s, e = rng
        if not (0 <= s < e <= n):
            raise CrossingGoldError(f"gold range [{s},{e}) outside 0..{n}")
        pairs.add(((s, e), node_id))
    ranges = sorted({rng for rng, _ in pairs})
    for i, a in enumerate(ranges):
        for b in ranges[i + 1:]:
            if b[0] >= a[1]:
                break
            if _crosses(a, b):
                raise CrossingGoldError(f"gold ranges {a} and {b} cross")
    labels = {}
    for rng, node_id in sorted(pairs):
        labels.setdefault(rng, []).append(node_id)
    return pairs, labels


def _oracle_step(state: ParserState, ranges, labels) -> Action:
    emitted = set(state.emitted)
    top = state.stack[-1] if state.stack else None

    # 1. Top segment is a gold range with labels still owed.
    if top is not None and top in labels:
        for node_id in labels[top]:  # lexicographically smallest first
            if (top, node_id) not in emitted:
                return label(node_id)

    # 2. Merge the adjacent top two, unless the top segment still has to
    #    grow rightward into a same-start gold range (merging left would
    #    bury its start and make that range underivable).
    if len(state.stack) >= 2 and state.stack[-2][1] == top[0]:
        union = (state.stack[-2][0], top[1])
        fits = any(_contains(g, union) for g in ranges)
        pending = any(g[0] == top[0] and g[1] > top[1] for g in ranges)
        if fits and not pending:
            return MERGE_ACTION

    # 3. Shift to start work, or to keep feeding a gold range the top
    #    segment is a proper prefix piece of (its next token must be the
    #    very next buffer token, otherwise the range is already lost).
    if state.buffer_pos < state.n_tokens:
        if top is None:
            return SHIFT_ACTION
        if top[1] == state.buffer_pos and any(
                g[0] <= top[0] and g[1] > top[1] for g in ranges):
            return SHIFT_ACTION

    # 4. Nothing useful left for this segment.
    return POP_ACTION


def oracle_actions(tokens, gold) -> list:
    """Derive the canonical action sequence reproducing `gold` exactly.

    Gold is a list of ((start, end) token range, node_id) pairs, pairwise
    disjoint-or-nested. Raises CrossingGold when that precondition fails
    and NotDerivable if (defensively) replay would not match.
    """
    pairs, labels = check_gold(tokens, gold)
    ranges = set(labels)
    state = initial_state(tokens)
    actions = []
    budget = 3 * len(tokens) + len(pairs) + 1
    while not state.done:
        if len(actions) > budget:
            raise NotDerivableError("oracle exceeded its action budget")
        action = _oracle_step(state, ranges, labels)
        actions.append(action)
        state = apply(state, action)
    if set(state.emitted) != pairs:
        raise NotDerivableError(
            f"replay emitted {sorted(set(state.emitted))}, wanted {sorted(pairs)}")
    return actions


def mention_depths(gold) -> dict:
    """Nesting depth per gold range: number of strictly containing ranges.

    Same-range multi-labels share a depth; 0 means outermost.
    """
    ranges = {rng for rng, _ in gold}
    depths = {}
    for r in ranges:
        depths[r] = sum(1 for other in ranges
                        if other != r and _contains(other, r))
    return depths
