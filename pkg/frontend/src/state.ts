/**
 * Pure view-state for the exploration tree.
 *
 * Visibility rule: a node is visible iff it is not dismissed and it is the
 * root, a hub, or it was revealed by expanding its (still visible) parent.
 * A photo node is visible iff its tree node is visible, except in the
 * initial view where only the hubs' photo nodes show. Selection flags mirror
 * the server's session state after every mutation round-trip; the client
 * never invents them.
 */

import type { InitialView, SelectionState, TreeNodeData } from "./api";

export interface ExplorerState {
  nodes: Map<string, TreeNodeData>;
  rootId: string | null;
  /** node -> child ids revealed by expanding that node */
  revealed: Map<string, string[]>;
  dismissed: Set<string>;
  /** photo nodes shown before any expansion, from the server's initial view */
  initialPhotoNodes: Set<string>; // "nodeId/photoId"
  expandedAnything: boolean;
  selectedKeywords: string[];
  selectedNodeIds: Set<string>;
  focusedNodeId: string | null;
  searchHits: Set<string>;
}

export function createState(
  nodes: TreeNodeData[],
  initialView: InitialView,
): ExplorerState {
  const map = new Map(nodes.map((n) => [n.id, n]));
  const root = nodes.find((n) => n.role === "root") ?? null;
  return {
    nodes: map,
    rootId: root ? root.id : null,
    revealed: new Map(),
    dismissed: new Set(),
    initialPhotoNodes: new Set(
      initialView.photo_nodes.map((pn) => `${pn.node_id}/${pn.photo_id}`),
    ),
    expandedAnything: false,
    selectedKeywords: [],
    selectedNodeIds: new Set(),
    focusedNodeId: root ? root.id : null,
    searchHits: new Set(),
  };
}

export function applyExpand(
  state: ExplorerState,
  nodeId: string,
  children: TreeNodeData[],
): void {
  for (const child of children) {
    if (!state.nodes.has(child.id)) state.nodes.set(child.id, child);
  }
  state.revealed.set(
    nodeId,
    children.map((c) => c.id),
  );
  state.expandedAnything = true;
}

export function applyDismiss(state: ExplorerState, nodeId: string): void {
  state.dismissed.add(nodeId);
  if (state.focusedNodeId === nodeId) state.focusedNodeId = state.rootId;
}

export function applySelection(state: ExplorerState, selection: SelectionState): void {
  state.selectedKeywords = [...selection.selected_keywords];
  state.selectedNodeIds = new Set(selection.selected_node_ids);
}

/** Node ids visible under the visibility rule, in stable id order. */
export function visibleNodeIds(state: ExplorerState): string[] {
  const visible = new Set<string>();
  let grew = true;
  while (grew) {
    grew = false;
    for (const [id, node] of state.nodes) {
      if (visible.has(id) || state.dismissed.has(id)) continue;
      const byRole = node.role === "root" || node.role === "hub";
      const byExpand =
        node.parent !== null &&
        visible.has(node.parent) &&
        (state.revealed.get(node.parent) ?? []).includes(id);
      if (byRole || byExpand) {
        visible.add(id);
        grew = true;
      }
    }
  }
  return [...visible].sort();
}

/** Visible photo nodes as {nodeId, photoId}; initial view shows hub photos only. */
export function visiblePhotoNodes(
  state: ExplorerState,
): { nodeId: string; photoId: string }[] {
  const out: { nodeId: string; photoId: string }[] = [];
  for (const nodeId of visibleNodeIds(state)) {
    const node = state.nodes.get(nodeId)!;
    for (const pn of node.photo_nodes) {
      const key = `${nodeId}/${pn.photo_id}`;
      if (state.expandedAnything || state.initialPhotoNodes.has(key)) {
        out.push({ nodeId, photoId: pn.photo_id });
      }
    }
  }
  return out;
}

/** Parent->child links where both endpoints are visible. */
export function visibleLinks(state: ExplorerState): { source: string; target: string }[] {
  const visible = new Set(visibleNodeIds(state));
  const links: { source: string; target: string }[] = [];
  for (const id of visible) {
    const node = state.nodes.get(id)!;
    if (node.parent !== null && visible.has(node.parent)) {
      links.push({ source: node.parent, target: id });
    }
  }
  return links;
}
