/** Concept word cloud: one clickable word per ontology concept, font size
 * monotone in citation count, denial-only concepts styled distinctly. */

import type { ConceptEntry } from "./types.js";

export const MIN_FONT_PX = 13;
export const MAX_FONT_PX = 42;

/** Monotone (strictly increasing in count) font scaling. */
export function fontSizePx(count: number, minCount: number, maxCount: number): number {
  if (maxCount <= minCount) return (MIN_FONT_PX + MAX_FONT_PX) / 2;
  const t = (count - minCount) / (maxCount - minCount);
  return MIN_FONT_PX + t * (MAX_FONT_PX - MIN_FONT_PX);
}

export function renderWordCloud(
  container: HTMLElement,
  concepts: ConceptEntry[],
  onSelect: (node: string) => void,
): void {
  container.textContent = "";
  container.classList.add("word-cloud");
  if (concepts.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "Sem conceitos indexados para este doente.";
    container.appendChild(empty);
    return;
  }
  const counts = concepts.map((c) => c.count);
  const minCount = Math.min(...counts);
  const maxCount = Math.max(...counts);
  for (const concept of concepts) {
    const word = document.createElement("button");
    word.type = "button";
    word.className = "cloud-word";
    if (concept.negated) word.classList.add("denied");
    word.dataset.node = concept.node;
    word.dataset.count = String(concept.count);
    word.textContent = concept.label;
    word.title = `${concept.node} — ${concept.count} citações`;
    word.style.fontSize = `${fontSizePx(concept.count, minCount, maxCount).toFixed(2)}px`;
    word.addEventListener("click", () => onSelect(concept.node));
    container.appendChild(word);
  }
}
