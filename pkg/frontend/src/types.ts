/** Payload types for the annotation service API (mirrors api_schema.json). */

export interface CatalogModifier {
  id: string;
  label: string;
  scope: "universal" | string[];
}

export interface CatalogNode {
  id: string;
  label: string;
  level: number;
  modifiers: string[];
  children: CatalogNode[];
}

export interface CatalogPayload {
  version: string;
  modifiers: CatalogModifier[];
  tree: CatalogNode[];
}

export interface MentionPayload {
  id: string;
  start: number;
  end: number;
  node: string;
  modifiers: string[];
}

export interface DocumentPayload {
  doc: {
    id: string;
    patient_id: string;
    date: string;
    record_type: string;
    specialty: string;
    text: string;
  };
  mentions: MentionPayload[];
}

export interface ConceptEntry {
  node: string;
  label: string;
  count: number;
  negated?: boolean;
}

export interface ConceptsPayload {
  patient_id: string;
  concepts: ConceptEntry[];
}

export interface CitationPayload {
  date: string;
  doc_id: string;
  record_type: string;
  specialty: string;
  start: number;
  end: number;
  modifiers: string[];
  surface: string;
}

export interface TimelinePayload {
  patient_id: string;
  node: string;
  citations: CitationPayload[];
}

export interface TextsPayload {
  patient_id: string;
  count: number;
  doc_ids: string[];
}

export interface AnnotationRequest {
  start: number;
  end: number;
  node: string;
  modifiers: string[];
}
