/** HTTP client for the annotation service. Components depend only on the
 * ApiClient interface, so tests can plug an in-memory fixture server. */

import type {
  AnnotationRequest,
  CatalogPayload,
  ConceptsPayload,
  DocumentPayload,
  MentionPayload,
  TextsPayload,
  TimelinePayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    public readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

export interface ApiClient {
  getCatalog(): Promise<CatalogPayload>;
  getConcepts(patientId: string): Promise<ConceptsPayload>;
  getTimeline(patientId: string, node: string): Promise<TimelinePayload>;
  getTexts(patientId: string, nodes: string[], mode: "any" | "all"): Promise<TextsPayload>;
  getDocument(docId: string): Promise<DocumentPayload>;
  createAnnotation(docId: string, payload: AnnotationRequest): Promise<MentionPayload>;
  deleteAnnotation(docId: string, mentionId: string): Promise<void>;
  predict(text: string): Promise<MentionPayload[]>;
}

async function asApiError(response: Response): Promise<ApiError> {
  let code = `HTTP${response.status}`;
  let detail = response.statusText;
  try {
    const body = await response.json();
    if (body && typeof body.error === "string") {
      code = body.error;
      detail = body.detail ?? "";
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, code, detail);
}

export class HttpApiClient implements ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly token?: string,
  ) {}

  private headers(json = false): Record<string, string> {
    const h: Record<string, string> = {};
    if (json) h["Content-Type"] = "application/json";
    if (this.token) h["Authorization"] = `Bearer ${this.token}`;
    return h;
  }

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(this.base + path, { headers: this.headers() });
    if (!response.ok) throw await asApiError(response);
    return (await response.json()) as T;
  }

  getCatalog(): Promise<CatalogPayload> {
    return this.get("/catalog");
  }

  getConcepts(patientId: string): Promise<ConceptsPayload> {
    return this.get(`/patients/${encodeURIComponent(patientId)}/concepts`);
  }

  getTimeline(patientId: string, node: string): Promise<TimelinePayload> {
    const q = new URLSearchParams({ node });
    return this.get(`/patients/${encodeURIComponent(patientId)}/timeline?${q}`);
  }

  getTexts(patientId: string, nodes: string[], mode: "any" | "all"): Promise<TextsPayload> {
    const q = new URLSearchParams({ nodes: nodes.join(","), mode });
    return this.get(`/patients/${encodeURIComponent(patientId)}/texts?${q}`);
  }

  getDocument(docId: string): Promise<DocumentPayload> {
    return this.get(`/documents/${encodeURIComponent(docId)}`);
  }

  async createAnnotation(docId: string, payload: AnnotationRequest): Promise<MentionPayload> {
    const response = await fetch(
      `${this.base}/documents/${encodeURIComponent(docId)}/annotations`,
      { method: "POST", headers: this.headers(true), body: JSON.stringify(payload) },
    );
    if (!response.ok) throw await asApiError(response);
    const body = await response.json();
    return body.mention as MentionPayload;
  }

  async deleteAnnotation(docId: string, mentionId: string): Promise<void> {
    const response = await fetch(
      `${this.base}/documents/${encodeURIComponent(docId)}/annotations/${encodeURIComponent(mentionId)}`,
      { method: "DELETE", headers: this.headers() },
    );
    if (!response.ok) throw await asApiError(response);
  }

  async predict(text: string): Promise<MentionPayload[]> {
    const response = await fetch(`${this.base}/predict`, {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify({ text }),
    });
    if (!response.ok) throw await asApiError(response);
    const body = await response.json();
    return body.mentions as MentionPayload[];
  }
}
