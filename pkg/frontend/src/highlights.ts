/** Nested colored highlights with hover tags.
 *
 * Mentions are pairwise disjoint-or-nested (the server guarantees it), so
 * they form a forest; each mention renders as a span wrapping its slice of
 * text, nested mentions as spans inside it. One fixed color per level-1
 * class; background bands plus a solid underline layer visibly for nested
 * structures. Negated mentions get a distinct denial style. */

import type { CatalogIndex } from "./catalog.js";
import { colorForRoot } from "./colors.js";
import type { MentionPayload } from "./types.js";

interface ForestNode {
  mention: MentionPayload;
  children: ForestNode[];
}

export function buildForest(mentions: MentionPayload[]): ForestNode[] {
  const ordered = [...mentions].sort(
    (a, b) => a.start - b.start || b.end - a.end || (a.node < b.node ? -1 : 1),
  );
  const roots: ForestNode[] = [];
  const stack: ForestNode[] = [];
  for (const mention of ordered) {
    const node: ForestNode = { mention, children: [] };
    while (stack.length > 0) {
      const top = stack[stack.length - 1].mention;
      if (top.start <= mention.start && mention.end <= top.end) break;
      stack.pop();
    }
    if (stack.length === 0) roots.push(node);
    else stack[stack.length - 1].children.push(node);
    stack.push(node);
  }
  return roots;
}

function rgba(hex: string, alpha: number): string {
  const r = parseInt(hex.slice(1, 3), 16);
  const g = parseInt(hex.slice(3, 5), 16);
  const b = parseInt(hex.slice(5, 7), 16);
  return `rgba(${r}, ${g}, ${b}, ${alpha})`;
}

export function hoverTag(mention: MentionPayload, catalog: CatalogIndex): string {
  const label = catalog.label(mention.node);
  if (mention.modifiers.length === 0) return label;
  const mods = mention.modifiers
    .map((m) => catalog.modifierLabels.get(m) ?? m)
    .join(", ");
  return `${label} [${mods}]`;
}

function mentionElement(node: ForestNode, catalog: CatalogIndex): HTMLElement {
  const { mention } = node;
  const el = document.createElement("span");
  const rootId = catalog.info(mention.node)?.roots[0];
  const color = colorForRoot(rootId);
  el.className = "mention";
  if (rootId) el.classList.add(`root-${rootId.replace(/[^a-z0-9_]/gi, "_")}`);
  if (mention.modifiers.includes("negation")) el.classList.add("denied");
  el.dataset.id = mention.id;
  el.dataset.node = mention.node;
  el.dataset.start = String(mention.start);
  el.dataset.end = String(mention.end);
  el.title = hoverTag(mention, catalog);
  el.style.backgroundColor = rgba(color, 0.18);
  el.style.borderBottom = `2px solid ${color}`;
  return el;
}

function renderRange(
  target: HTMLElement,
  text: string,
  from: number,
  to: number,
  nodes: ForestNode[],
  catalog: CatalogIndex,
): void {
  let cursor = from;
  for (const node of nodes) {
    const { start, end } = node.mention;
    if (start > cursor) target.appendChild(document.createTextNode(text.slice(cursor, start)));
    const el = mentionElement(node, catalog);
    renderRange(el, text, start, end, node.children, catalog);
    target.appendChild(el);
    cursor = Math.max(cursor, end);
  }
  if (cursor < to) target.appendChild(document.createTextNode(text.slice(cursor, to)));
}

/** Render `text` into `container` with all mentions highlighted. */
export function renderHighlights(
  container: HTMLElement,
  text: string,
  mentions: MentionPayload[],
  catalog: CatalogIndex,
): void {
  container.textContent = "";
  container.classList.add("annotated-text");
  renderRange(container, text, 0, text.length, buildForest(mentions), catalog);
}
