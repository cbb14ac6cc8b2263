/** Clinician workspace: word cloud as the entry point to the patient's
 * history, concept timeline on click, and source-document drill-down. */

import type { ApiClient } from "./api.js";
import type { CatalogIndex } from "./catalog.js";
import { DocumentView } from "./documentView.js";
import { renderTimeline } from "./timeline.js";
import { renderWordCloud } from "./wordCloud.js";

export class ClinicianWorkspace {
  readonly cloudDiv: HTMLElement;
  readonly timelineDiv: HTMLElement;
  readonly documentView: DocumentView;
  patientId = "";

  constructor(
    container: HTMLElement,
    private readonly api: ApiClient,
    catalog: CatalogIndex,
  ) {
    container.classList.add("clinician-workspace");
    this.cloudDiv = document.createElement("div");
    this.timelineDiv = document.createElement("div");
    const docDiv = document.createElement("div");
    this.documentView = new DocumentView(docDiv, api, catalog);
    container.append(this.cloudDiv, this.timelineDiv, docDiv);
  }

  async openPatient(patientId: string): Promise<void> {
    this.patientId = patientId;
    const payload = await this.api.getConcepts(patientId);
    renderWordCloud(this.cloudDiv, payload.concepts,
                    (node) => void this.openTimeline(node));
    this.timelineDiv.textContent = "";
  }

  async openTimeline(node: string): Promise<void> {
    const payload = await this.api.getTimeline(this.patientId, node);
    renderTimeline(this.timelineDiv, payload, (citation) =>
      void this.documentView.open(citation.doc_id,
                                  { start: citation.start, end: citation.end }));
  }
}
