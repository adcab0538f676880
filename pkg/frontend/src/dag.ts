/** Layered layout for explanation DAGs.
 *
 * Facts sit on layer 0 and every derived node one layer past its deepest
 * support, mirroring the structure of the service export; the client never
 * invents nodes or edges.
 */

import type { DagDoc } from "./types.js";

export interface PlacedNode {
  atom: string;
  kind: "fact" | "derived";
  x: number;
  y: number;
}

export interface PlacedEdge {
  from: string;
  to: string;
  rule: string;
}

export interface DagLayout {
  nodes: PlacedNode[];
  edges: PlacedEdge[];
  columns: number;
  layers: number;
}

export function layoutDag(doc: DagDoc): DagLayout {
  const supports = new Map<string, string[]>();
  for (const edge of doc.edges) {
    supports.set(edge.from, edge.to);
  }
  const depth = new Map<string, number>();
  const visiting = new Set<string>();

  const depthOf = (atom: string): number => {
    const known = depth.get(atom);
    if (known !== undefined) return known;
    if (visiting.has(atom)) {
      throw new Error(`support cycle through ${atom}`);
    }
    visiting.add(atom);
    const deps = supports.get(atom) ?? [];
    const d = deps.length === 0 ? 0 : 1 + Math.max(...deps.map(depthOf));
    visiting.delete(atom);
    depth.set(atom, d);
    return d;
  };

  const byLayer = new Map<number, typeof doc.nodes>();
  for (const node of doc.nodes) {
    const d = depthOf(node.atom);
    const layer = byLayer.get(d) ?? [];
    layer.push(node);
    byLayer.set(d, layer);
  }
  const layers = byLayer.size === 0 ? 0 : Math.max(...byLayer.keys()) + 1;
  const columns = Math.max(1, ...[...byLayer.values()].map((l) => l.length));

  const nodes: PlacedNode[] = [];
  for (const [layer, members] of [...byLayer.entries()].sort(([a], [b]) => a - b)) {
    members.sort((a, b) => a.atom.localeCompare(b.atom));
    const offset = (columns - members.length) / 2;
    members.forEach((node, i) => {
      nodes.push({ atom: node.atom, kind: node.kind, x: offset + i, y: layer });
    });
  }
  const edges: PlacedEdge[] = doc.edges.flatMap((edge) =>
    edge.to.map((target) => ({ from: edge.from, to: target, rule: edge.rule })),
  );
  return { nodes, edges, columns, layers };
}
