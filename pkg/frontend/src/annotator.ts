/** Annotator workspace: span selection, category/modifier choice, save,
 * bulk annotate-all and the review pane. The server is the source of
 * truth: every accepted mention is re-read from its response, and any 422
 * is rendered inline with its error code. */

import type { ApiClient } from "./api.js";
import { ApiError } from "./api.js";
import type { CatalogIndex } from "./catalog.js";
import { CatalogPanel } from "./catalogPanel.js";
import { renderHighlights } from "./highlights.js";
import { findOccurrences } from "./occurrences.js";
import { ReviewPane } from "./reviewPane.js";
import type { MentionPayload } from "./types.js";

export interface PendingSelection {
  start: number;
  end: number;
}

export class AnnotatorWorkspace {
  readonly panel: CatalogPanel;
  readonly textDiv: HTMLElement;
  readonly statusDiv: HTMLElement;
  readonly toastDiv: HTMLElement;
  readonly saveButton: HTMLButtonElement;
  readonly annotateAllButton: HTMLButtonElement;
  private readonly reviewPane: ReviewPane;

  docId = "";
  text = "";
  mentions: MentionPayload[] = [];
  selection: PendingSelection | null = null;

  constructor(
    container: HTMLElement,
    private readonly api: ApiClient,
    private readonly catalog: CatalogIndex,
  ) {
    container.classList.add("annotator-workspace");
    this.textDiv = document.createElement("div");
    this.textDiv.className = "document-text";
    this.statusDiv = document.createElement("div");
    this.statusDiv.className = "status-line";
    this.toastDiv = document.createElement("div");
    this.toastDiv.className = "toast";

    const panelDiv = document.createElement("div");
    this.panel = new CatalogPanel(panelDiv, catalog, () => this.refreshControls());

    this.saveButton = document.createElement("button");
    this.saveButton.type = "button";
    this.saveButton.className = "save-annotation";
    this.saveButton.textContent = "Anotar seleção";
    this.saveButton.disabled = true;
    this.saveButton.addEventListener("click", () => void this.save());

    this.annotateAllButton = document.createElement("button");
    this.annotateAllButton.type = "button";
    this.annotateAllButton.className = "annotate-all";
    this.annotateAllButton.textContent = "Anotar todas as ocorrências";
    this.annotateAllButton.disabled = true;
    this.annotateAllButton.addEventListener("click", () => void this.annotateAll());

    const reviewDiv = document.createElement("div");
    this.reviewPane = new ReviewPane(
      reviewDiv,
      catalog,
      (mentionId) => void this.deleteMention(mentionId),
      (mention) => this.scrollToMention(mention),
    );

    container.append(this.textDiv, this.statusDiv, this.toastDiv,
                     this.saveButton, this.annotateAllButton, panelDiv, reviewDiv);

    this.textDiv.addEventListener("mouseup", () => this.captureDomSelection());
  }

  async open(docId: string): Promise<void> {
    const payload = await this.api.getDocument(docId);
    this.docId = payload.doc.id;
    this.text = payload.doc.text;
    this.mentions = payload.mentions;
    this.selection = null;
    this.statusDiv.textContent = "";
    this.render();
  }

  /** Selection as character offsets; the mouseup handler feeds this from
   * the live DOM selection, tests call it directly. */
  setSelection(start: number, end: number): void {
    if (start >= end || start < 0 || end > this.text.length) {
      this.selection = null;
    } else {
      this.selection = { start, end };
    }
    this.refreshControls();
  }

  private captureDomSelection(): void {
    const sel = window.getSelection();
    if (!sel || sel.rangeCount === 0 || sel.isCollapsed) return;
    const range = sel.getRangeAt(0);
    const measure = (node: Node, offset: number): number | null => {
      // character offset of (node, offset) within the rendered text
      let pos = 0;
      const walker = document.createTreeWalker(this.textDiv, NodeFilter.SHOW_TEXT);
      let current = walker.nextNode();
      while (current) {
        if (current === node) return pos + offset;
        pos += current.textContent?.length ?? 0;
        current = walker.nextNode();
      }
      return null;
    };
    const start = measure(range.startContainer, range.startOffset);
    const end = measure(range.endContainer, range.endOffset);
    if (start !== null && end !== null) this.setSelection(start, end);
  }

  private refreshControls(): void {
    const ready = this.selection !== null && this.panel.state.activeNode !== null;
    this.saveButton.disabled = !ready;
    const surface = this.selectedSurface();
    const occurrences = surface ? findOccurrences(this.text, surface) : [];
    this.annotateAllButton.disabled =
      !ready || occurrences.length === 0; // 0 occurrences -> disabled confirm
  }

  selectedSurface(): string | null {
    if (!this.selection) return null;
    return this.text.slice(this.selection.start, this.selection.end);
  }

  async save(): Promise<void> {
    if (!this.selection || !this.panel.state.activeNode) return;
    this.statusDiv.textContent = "";
    try {
      const mention = await this.api.createAnnotation(this.docId, {
        start: this.selection.start,
        end: this.selection.end,
        node: this.panel.state.activeNode,
        modifiers: [...this.panel.state.chosenModifiers].sort(),
      });
      this.mentions.push(mention);
      this.selection = null;
      this.render();
    } catch (err) {
      if (err instanceof ApiError) {
        this.statusDiv.textContent = `${err.code}: ${err.detail}`;
        this.statusDiv.classList.add("error");
      } else {
        throw err;
      }
    }
  }

  /** POST one annotation per token-aligned occurrence of the selected
   * surface; the rendered set is exactly the server-accepted set, skipped
   * occurrences are reported in a toast. */
  async annotateAll(): Promise<void> {
    const surface = this.selectedSurface();
    const node = this.panel.state.activeNode;
    if (!surface || !node) return;
    const modifiers = [...this.panel.state.chosenModifiers].sort();
    let added = 0;
    let skipped = 0;
    for (const occ of findOccurrences(this.text, surface)) {
      try {
        const mention = await this.api.createAnnotation(this.docId, {
          start: occ.start, end: occ.end, node, modifiers,
        });
        this.mentions.push(mention);
        added += 1;
      } catch (err) {
        if (err instanceof ApiError) skipped += 1;
        else throw err;
      }
    }
    this.toastDiv.textContent =
      skipped > 0
        ? `${added} ocorrências anotadas, ${skipped} ignoradas (conflito)`
        : `${added} ocorrências anotadas`;
    this.selection = null;
    this.render();
  }

  async deleteMention(mentionId: string): Promise<void> {
    await this.api.deleteAnnotation(this.docId, mentionId);
    this.mentions = this.mentions.filter((m) => m.id !== mentionId);
    this.render();
  }

  scrollToMention(mention: MentionPayload): void {
    const el = this.textDiv.querySelector<HTMLElement>(
      `.mention[data-id="${mention.id}"]`);
    el?.scrollIntoView({ block: "center" });
  }

  render(): void {
    renderHighlights(this.textDiv, this.text, this.mentions, this.catalog);
    this.reviewPane.render(this.text, this.mentions);
    this.refreshControls();
  }
}
