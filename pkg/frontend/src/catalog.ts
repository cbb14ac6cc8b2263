/** Client-side view over the catalog payload: node lookup, level-1 roots
 * (for coloring) and the search-box ranking. */

import type { CatalogNode, CatalogPayload } from "./types.js";

export interface NodeInfo {
  id: string;
  label: string;
  level: number;
  modifiers: string[];
  /** Level-1 roots this node sits under (poly-hierarchy: possibly several). */
  roots: string[];
}

const FOLD: Record<string, string> = {
  à: "a", á: "a", â: "a", ã: "a", ä: "a",
  ç: "c", è: "e", é: "e", ê: "e", ë: "e",
  ì: "i", í: "i", î: "i", ï: "i", ñ: "n",
  ò: "o", ó: "o", ô: "o", õ: "o", ö: "o",
  ù: "u", ú: "u", û: "u", ü: "u", ý: "y",
};

export function fold(text: string): string {
  return text
    .toLowerCase()
    .split("")
    .map((ch) => FOLD[ch] ?? ch)
    .join("");
}

export class CatalogIndex {
  readonly nodes = new Map<string, NodeInfo>();
  readonly version: string;
  readonly tree: CatalogNode[];
  readonly modifierLabels = new Map<string, string>();

  constructor(payload: CatalogPayload) {
    this.version = payload.version;
    this.tree = payload.tree;
    for (const m of payload.modifiers) this.modifierLabels.set(m.id, m.label);
    const walk = (node: CatalogNode, root: string) => {
      const existing = this.nodes.get(node.id);
      if (existing) {
        if (!existing.roots.includes(root)) existing.roots.push(root);
      } else {
        this.nodes.set(node.id, {
          id: node.id,
          label: node.label,
          level: node.level,
          modifiers: node.modifiers,
          roots: [root],
        });
      }
      for (const child of node.children) walk(child, root);
    };
    for (const top of payload.tree) walk(top, top.id);
  }

  info(nodeId: string): NodeInfo | undefined {
    return this.nodes.get(nodeId);
  }

  label(nodeId: string): string {
    return this.nodes.get(nodeId)?.label ?? nodeId;
  }

  /** Applicable modifier ids for a node; empty when the node is unknown. */
  applicableModifiers(nodeId: string): string[] {
    return this.nodes.get(nodeId)?.modifiers ?? [];
  }

  /** Same ranking as the server search box: exact label/id match first,
   * then prefix, then substring; ties by node id. */
  search(query: string): NodeInfo[] {
    const q = fold(query.trim());
    if (!q) return [];
    const ranked: Array<[number, string]> = [];
    for (const info of this.nodes.values()) {
      const label = fold(info.label);
      const id = fold(info.id);
      let rank: number;
      if (q === label || q === id) rank = 0;
      else if (label.startsWith(q) || id.startsWith(q)) rank = 1;
      else if (label.includes(q) || id.includes(q)) rank = 2;
      else continue;
      ranked.push([rank, info.id]);
    }
    ranked.sort((a, b) => (a[0] - b[0]) || (a[1] < b[1] ? -1 : a[1] > b[1] ? 1 : 0));
    return ranked.map(([, id]) => this.nodes.get(id)!);
  }
}
