/** Pane listing the annotated spans of the open document, ordered by span
 * start, with per-row delete and click-to-scroll. */

import type { CatalogIndex } from "./catalog.js";
import type { MentionPayload } from "./types.js";

export class ReviewPane {
  constructor(
    private readonly container: HTMLElement,
    private readonly catalog: CatalogIndex,
    private readonly onDelete: (mentionId: string) => void,
    private readonly onFocus: (mention: MentionPayload) => void,
  ) {
    container.classList.add("review-pane");
  }

  render(text: string, mentions: MentionPayload[]): void {
    this.container.textContent = "";
    const ordered = [...mentions].sort(
      (a, b) => a.start - b.start || a.end - b.end || (a.id < b.id ? -1 : 1),
    );
    for (const mention of ordered) {
      const row = document.createElement("div");
      row.className = "review-row";
      row.dataset.id = mention.id;

      const jump = document.createElement("button");
      jump.type = "button";
      jump.className = "review-jump";
      const surface = text.slice(mention.start, mention.end);
      const mods = mention.modifiers.length > 0 ? ` [${mention.modifiers.join(",")}]` : "";
      jump.textContent = `${surface} — ${this.catalog.label(mention.node)}${mods}`;
      jump.addEventListener("click", () => this.onFocus(mention));

      const del = document.createElement("button");
      del.type = "button";
      del.className = "review-delete";
      del.textContent = "×";
      del.title = "remover anotação";
      del.addEventListener("click", () => this.onDelete(mention.id));

      row.append(jump, del);
      this.container.appendChild(row);
    }
  }
}
