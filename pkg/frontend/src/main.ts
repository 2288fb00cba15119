/**
 * Application wiring: tree canvas on the left, controls + spot map on the
 * right, all state changes driven by service responses.
 */

import { ApiClient, ApiError } from "./api";
import { Controls } from "./controls";
import { MapView } from "./map_view";
import {
  applyDismiss,
  applyExpand,
  applySelection,
  createState,
  visibleNodeIds,
  type ExplorerState,
} from "./state";
import { TreeView } from "./tree_view";

export interface ExplorerOptions {
  animate?: boolean;
  sessionId?: string;
}

export class ExplorerApp {
  readonly sessionId: string;
  state: ExplorerState | null = null;
  readonly treeView: TreeView;
  readonly mapView: MapView;
  readonly controls: Controls;

  constructor(
    root: HTMLElement,
    private readonly api: ApiClient,
    options: ExplorerOptions = {},
  ) {
    this.sessionId =
      options.sessionId ?? `web-${Date.now().toString(36)}-${Math.floor(Math.random() * 1e6)}`;

    const treePane = document.createElement("div");
    treePane.className = "tree-pane";
    const sidePane = document.createElement("div");
    sidePane.className = "side-pane";
    root.append(treePane, sidePane);

    this.controls = new Controls(sidePane, {
      onShowChildren: () => this.expandFocused(),
      onSelectNode: () => this.selectFocused(),
      onSearchNodes: (text) => this.searchNodes(text),
      onSearchSpots: (region) => this.searchSpots(region),
      onDismissNode: () => this.dismissFocused(),
      onDeselectKeyword: (keyword) => this.deselectKeyword(keyword),
    });
    this.treeView = new TreeView(
      treePane,
      {
        onNodeClick: (nodeId) => this.focusNode(nodeId),
        onPhotoClick: (nodeId, photoId) => void this.selectPhoto(nodeId, photoId),
      },
      { animate: options.animate ?? true, photoHref: (pid) => api.photoUrl(pid) },
    );
    this.mapView = new MapView(sidePane);
  }

  async start(): Promise<void> {
    const tree = await this.api.getTree();
    this.state = createState(tree.nodes, tree.initial_view);
    this.treeView.render(this.state);
    this.controls.status(
      `${tree.initial_view.nodes.length} node(s) in the initial view; click one, then use the buttons.`,
    );
  }

  focusNode(nodeId: string): void {
    if (!this.state) return;
    this.state.focusedNodeId = nodeId;
    this.treeView.render(this.state);
    const node = this.state.nodes.get(nodeId);
    if (node) this.controls.status(`focused ${node.representative} (${nodeId})`);
  }

  async expandFocused(): Promise<void> {
    if (!this.state?.focusedNodeId) return;
    const nodeId = this.state.focusedNodeId;
    const children = await this.api.getChildren(nodeId);
    if (children.length === 0) {
      this.controls.status("no children to show for this node");
      return;
    }
    applyExpand(this.state, nodeId, children);
    this.treeView.render(this.state);
    this.controls.status(`${children.length} child node(s) shown`);
  }

  async selectFocused(): Promise<void> {
    if (!this.state?.focusedNodeId) return;
    const selection = await this.api.selectNode(this.sessionId, this.state.focusedNodeId);
    applySelection(this.state, selection);
    this.controls.showKeywords(this.state.selectedKeywords);
    this.treeView.render(this.state);
    this.controls.status(`selected keywords: ${selection.selected_keywords.join(", ")}`);
  }

  async selectPhoto(nodeId: string, photoId: string): Promise<void> {
    if (!this.state) return;
    try {
      const selection = await this.api.selectPhoto(this.sessionId, photoId, nodeId);
      applySelection(this.state, selection);
      this.controls.showKeywords(this.state.selectedKeywords);
      this.treeView.render(this.state);
      this.controls.status(`selected keywords: ${selection.selected_keywords.join(", ")}`);
    } catch (err) {
      this.controls.status(err instanceof Error ? err.message : String(err));
    }
  }

  async searchNodes(text: string): Promise<void> {
    if (!this.state) return;
    if (!text.trim()) {
      this.controls.status("type a keyword to search for");
      return;
    }
    const hits = await this.api.searchNodes(text);
    this.state.searchHits = new Set(hits.map((n) => n.id));
    this.treeView.render(this.state);
    if (hits.length === 0) {
      this.controls.status(`no nodes match "${text}"`);
      return;
    }
    const visible = new Set(visibleNodeIds(this.state));
    const hidden = hits.filter((n) => !visible.has(n.id));
    this.controls.status(
      `${hits.length} node(s) match "${text}"` +
        (hidden.length
          ? `; ${hidden.length} not yet revealed (under ${[
              ...new Set(hidden.map((n) => n.parent ?? "?")),
            ].join(", ")})`
          : ""),
    );
  }

  async searchSpots(region: string): Promise<void> {
    if (!this.state) return;
    try {
      const response = await this.api.searchSpots({
        session_id: this.sessionId,
        region,
      });
      this.mapView.show(response.spots);
      this.controls.status(
        `${response.spots.length} spot(s) for ${response.region} using ${response.keywords.join(", ")}`,
      );
    } catch (err) {
      if (err instanceof ApiError) {
        this.controls.status(err.message); // e.g. empty selection, empty region
        return;
      }
      throw err;
    }
  }

  dismissFocused(): void {
    if (!this.state?.focusedNodeId) return;
    const nodeId = this.state.focusedNodeId;
    if (nodeId === this.state.rootId) {
      this.controls.status("the root cannot be dismissed");
      return;
    }
    applyDismiss(this.state, nodeId);
    this.treeView.render(this.state);
    this.controls.status(`dismissed ${nodeId}`);
  }

  async deselectKeyword(keyword: string): Promise<void> {
    if (!this.state) return;
    const selection = await this.api.deselect(this.sessionId, keyword);
    applySelection(this.state, selection);
    this.controls.showKeywords(this.state.selectedKeywords);
    this.treeView.render(this.state);
  }
}

export function bootstrap(root: HTMLElement, baseUrl: string): ExplorerApp {
  const app = new ExplorerApp(root, new ApiClient(baseUrl));
  void app.start().catch((err) => {
    const banner = document.createElement("div");
    banner.className = "error-banner";
    banner.textContent = `failed to load the tree: ${err instanceof Error ? err.message : err}`;
    root.prepend(banner);
  });
  return app;
}
