/** Read-only source-document view used by the clinician workspace: full
 * text with highlights, optionally scrolled to one focused citation. */

import type { ApiClient } from "./api.js";
import type { CatalogIndex } from "./catalog.js";
import { renderHighlights } from "./highlights.js";

export interface CitationFocus {
  start: number;
  end: number;
}

export class DocumentView {
  readonly headerDiv: HTMLElement;
  readonly textDiv: HTMLElement;

  constructor(
    container: HTMLElement,
    private readonly api: ApiClient,
    private readonly catalog: CatalogIndex,
  ) {
    container.classList.add("document-view");
    this.headerDiv = document.createElement("div");
    this.headerDiv.className = "document-header";
    this.textDiv = document.createElement("div");
    this.textDiv.className = "document-text";
    container.append(this.headerDiv, this.textDiv);
  }

  async open(docId: string, focus?: CitationFocus): Promise<void> {
    const payload = await this.api.getDocument(docId);
    const { doc } = payload;
    this.headerDiv.textContent =
      `${doc.id} — ${doc.date} — ${doc.record_type} — ${doc.specialty}`;
    renderHighlights(this.textDiv, doc.text, payload.mentions, this.catalog);
    if (focus) this.focusSpan(focus);
  }

  /** Highlight and scroll to the cited span ("the user is taken to the
   * original text"). Falls back to wrapping the raw range when no mention
   * element matches (e.g. a stale index). */
  focusSpan(focus: CitationFocus): void {
    const match = this.textDiv.querySelector<HTMLElement>(
      `.mention[data-start="${focus.start}"][data-end="${focus.end}"]`);
    if (match) {
      match.classList.add("citation-focus");
      match.scrollIntoView({ block: "center" });
      return;
    }
    const overlay = document.createElement("span");
    overlay.className = "citation-focus";
    const walker = document.createTreeWalker(this.textDiv, NodeFilter.SHOW_TEXT);
    let pos = 0;
    let node = walker.nextNode();
    while (node) {
      const len = node.textContent?.length ?? 0;
      if (pos <= focus.start && focus.end <= pos + len) {
        const range = document.createRange();
        range.setStart(node, focus.start - pos);
        range.setEnd(node, focus.end - pos);
        range.surroundContents(overlay);
        overlay.scrollIntoView({ block: "center" });
        return;
      }
      pos += len;
      node = walker.nextNode();
    }
  }
}
