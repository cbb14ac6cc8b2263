/** Ontology side panel: tree, search box and modifier controls.
 *
 * Modifier checkboxes exist only for the active node's applicable set, so
 * an inapplicable modifier cannot even be attempted (the server still
 * enforces the rule independently). */

import type { CatalogIndex } from "./catalog.js";

export interface CatalogPanelState {
  activeNode: string | null;
  chosenModifiers: Set<string>;
}

export class CatalogPanel {
  readonly state: CatalogPanelState = { activeNode: null, chosenModifiers: new Set() };
  private readonly treeDiv: HTMLElement;
  private readonly searchInput: HTMLInputElement;
  private readonly resultsDiv: HTMLElement;
  private readonly modifiersDiv: HTMLElement;

  constructor(
    container: HTMLElement,
    private readonly catalog: CatalogIndex,
    private readonly onChange: () => void = () => {},
  ) {
    container.classList.add("catalog-panel");
    this.searchInput = document.createElement("input");
    this.searchInput.type = "search";
    this.searchInput.className = "catalog-search";
    this.searchInput.placeholder = "Procurar categoria...";
    this.searchInput.addEventListener("input", () => this.renderSearch());
    this.resultsDiv = document.createElement("div");
    this.resultsDiv.className = "search-results";
    this.treeDiv = document.createElement("div");
    this.treeDiv.className = "catalog-tree";
    this.modifiersDiv = document.createElement("div");
    this.modifiersDiv.className = "modifier-controls";
    container.append(this.searchInput, this.resultsDiv, this.treeDiv, this.modifiersDiv);
    this.renderTree();
    this.renderModifiers();
  }

  selectNode(nodeId: string): void {
    if (!this.catalog.info(nodeId)) return;
    this.state.activeNode = nodeId;
    this.state.chosenModifiers.clear();
    this.renderTree();
    this.renderModifiers();
    this.onChange();
  }

  toggleModifier(modifierId: string): void {
    const applicable = this.state.activeNode
      ? this.catalog.applicableModifiers(this.state.activeNode)
      : [];
    if (!applicable.includes(modifierId)) return; // masked: cannot be chosen
    if (this.state.chosenModifiers.has(modifierId)) {
      this.state.chosenModifiers.delete(modifierId);
    } else {
      this.state.chosenModifiers.add(modifierId);
    }
    this.renderModifiers();
    this.onChange();
  }

  private renderSearch(): void {
    this.resultsDiv.textContent = "";
    const hits = this.catalog.search(this.searchInput.value).slice(0, 8);
    for (const info of hits) {
      const row = document.createElement("button");
      row.type = "button";
      row.className = "search-hit";
      row.dataset.node = info.id;
      row.textContent = `${info.label} (${info.id})`;
      row.addEventListener("click", () => this.selectNode(info.id));
      this.resultsDiv.appendChild(row);
    }
  }

  private renderTree(): void {
    this.treeDiv.textContent = "";
    const renderLevel = (parent: HTMLElement, nodes: typeof this.catalog.tree) => {
      const ul = document.createElement("ul");
      for (const node of nodes) {
        const li = document.createElement("li");
        const btn = document.createElement("button");
        btn.type = "button";
        btn.className = "tree-node";
        btn.dataset.node = node.id;
        btn.textContent = node.label;
        if (node.id === this.state.activeNode) btn.classList.add("active");
        btn.addEventListener("click", () => this.selectNode(node.id));
        li.appendChild(btn);
        if (node.children.length > 0) renderLevel(li, node.children);
        ul.appendChild(li);
      }
      parent.appendChild(ul);
    };
    renderLevel(this.treeDiv, this.catalog.tree);
  }

  private renderModifiers(): void {
    this.modifiersDiv.textContent = "";
    if (!this.state.activeNode) return;
    for (const modifierId of this.catalog.applicableModifiers(this.state.activeNode)) {
      const label = document.createElement("label");
      label.className = "modifier-option";
      const box = document.createElement("input");
      box.type = "checkbox";
      box.dataset.modifier = modifierId;
      box.checked = this.state.chosenModifiers.has(modifierId);
      box.addEventListener("change", () => this.toggleModifier(modifierId));
      label.append(box, document.createTextNode(
        this.catalog.modifierLabels.get(modifierId) ?? modifierId));
      this.modifiersDiv.appendChild(label);
    }
  }
}
