/** Fixed highlight palette keyed by level-1 node id; deterministic across
 * sessions so reviewers see stable colors. */

export const LEVEL1_COLORS: Record<string, string> = {
  pathological_conditions: "#e4572e",
  devices: "#17bebb",
  interventions: "#76b041",
  clinical_findings: "#ffc914",
  anatomic_structure: "#2e86ab",
  gyn_obstetric_history: "#a846a0",
  tests: "#8d6a9f",
  time: "#6b7780",
};

export const FALLBACK_COLOR = "#999999";

export function colorForRoot(rootId: string | undefined): string {
  if (!rootId) return FALLBACK_COLOR;
  return LEVEL1_COLORS[rootId] ?? FALLBACK_COLOR;
}
