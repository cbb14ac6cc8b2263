import { beforeEach, describe, expect, it } from "vitest";

import { CatalogIndex } from "../src/catalog.js";
import { buildForest, hoverTag, renderHighlights } from "../src/highlights.js";
import type { MentionPayload } from "../src/types.js";
import { CATALOG_FIXTURE } from "./fixtureServer.js";

const catalog = new CatalogIndex(CATALOG_FIXTURE);

beforeEach(() => {
  document.body.innerHTML = "";
});

function render(text: string, mentions: MentionPayload[]): HTMLElement {
  const div = document.createElement("div");
  document.body.appendChild(div);
  renderHighlights(div, text, mentions, catalog);
  return div;
}

describe("nested highlight rendering", () => {
  it("renders two layers for a nested mention pair", () => {
    const text = "Doente com derrame pleural .";
    const div = render(text, [
      { id: "m1", start: 11, end: 26, node: "clinical_findings/symptoms_signs", modifiers: [] },
      { id: "m2", start: 19, end: 26, node: "anatomic_structure", modifiers: [] },
    ]);
    const outer = div.querySelector<HTMLElement>('[data-id="m1"]')!;
    const inner = outer.querySelector<HTMLElement>('[data-id="m2"]')!;
    expect(outer.textContent).toBe("derrame pleural");
    expect(inner.textContent).toBe("pleural");
    expect(div.textContent).toBe(text);
  });

  it("gives different level-1 classes different colors", () => {
    const div = render("Colesterol total : 216 ; hemograma normal", [
      { id: "m1", start: 0, end: 16, node: "clinical_findings/test_results", modifiers: [] },
      { id: "m2", start: 25, end: 34, node: "tests", modifiers: [] },
    ]);
    const [a, b] = [...div.querySelectorAll<HTMLElement>(".mention")];
    expect(a.style.borderBottom).not.toBe(b.style.borderBottom);
  });

  it("marks negated mentions with the denial style", () => {
    const div = render("sem alergias alimentares", [
      { id: "m1", start: 4, end: 24, node: "pathological_conditions",
        modifiers: ["negation"] },
    ]);
    expect(div.querySelector(".mention")!.classList.contains("denied")).toBe(true);
  });

  it("hover tag carries the node label and modifier labels", () => {
    const tag = hoverTag(
      { id: "m", start: 0, end: 4, node: "interventions/medication",
        modifiers: ["ongoing", "negation"] },
      catalog,
    );
    expect(tag).toBe("Medicação [Em curso, Negação]");
  });

  it("is deterministic for a fixed fixture (snapshot)", () => {
    const text = "ANÁLISES :\nColesterol total : 216 ; sem derrame pleural .";
    const div = render(text, [
      { id: "m1", start: 11, end: 27, node: "clinical_findings/test_results", modifiers: [] },
      { id: "m2", start: 40, end: 55, node: "clinical_findings/symptoms_signs",
        modifiers: ["negation"] },
      { id: "m3", start: 48, end: 55, node: "anatomic_structure", modifiers: [] },
    ]);
    expect(div.innerHTML).toMatchSnapshot();
  });
});

describe("forest construction", () => {
  it("nests same-span multi-labels deterministically", () => {
    const forest = buildForest([
      { id: "b", start: 0, end: 5, node: "tests", modifiers: [] },
      { id: "a", start: 0, end: 5, node: "clinical_findings", modifiers: [] },
    ]);
    expect(forest).toHaveLength(1);
    expect(forest[0].mention.node).toBe("clinical_findings");
    expect(forest[0].children[0].mention.node).toBe("tests");
  });

  it("keeps disjoint mentions as siblings", () => {
    const forest = buildForest([
      { id: "a", start: 0, end: 3, node: "tests", modifiers: [] },
      { id: "b", start: 5, end: 9, node: "tests", modifiers: [] },
    ]);
    expect(forest).toHaveLength(2);
  });
});
