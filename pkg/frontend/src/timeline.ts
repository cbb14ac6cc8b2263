/** Concept timeline: chronological citation list with date, record type
 * and specialty; clicking an entry opens the source document at the
 * citation span. */

import type { CitationPayload, TimelinePayload } from "./types.js";

export function renderTimeline(
  container: HTMLElement,
  payload: TimelinePayload,
  onOpen: (citation: CitationPayload) => void,
): void {
  container.textContent = "";
  container.classList.add("timeline");
  if (payload.citations.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "Sem citações deste conceito.";
    container.appendChild(empty);
    return;
  }
  const list = document.createElement("ol");
  for (const citation of payload.citations) {
    const item = document.createElement("li");
    const btn = document.createElement("button");
    btn.type = "button";
    btn.className = "timeline-entry";
    btn.dataset.docId = citation.doc_id;
    btn.dataset.start = String(citation.start);
    btn.dataset.end = String(citation.end);
    const denied = citation.modifiers.includes("negation") ? " (negado)" : "";
    btn.textContent =
      `${citation.date}  ${citation.record_type}  ${citation.specialty}` +
      `  — "${citation.surface}"${denied}`;
    if (denied) btn.classList.add("denied");
    btn.addEventListener("click", () => onOpen(citation));
    item.appendChild(btn);
    list.appendChild(item);
  }
  container.appendChild(list);
}
