/**
 * Force-directed node-link rendering of the visible part of the tree.
 *
 * The root is pinned to the center of the canvas and hubs settle around it.
 * Hidden nodes are excluded from the simulation entirely. Hovering a photo
 * node shows the keyword list of the node it decorates.
 */

import * as d3 from "d3";

import type { ExplorerState } from "./state";
import { visibleLinks, visibleNodeIds, visiblePhotoNodes } from "./state";

interface SimNode extends d3.SimulationNodeDatum {
  id: string;
  kind: "node" | "photo";
  nodeId: string; // decorated node for photos, self for tree nodes
  label: string;
}

interface SimLink extends d3.SimulationLinkDatum<SimNode> {
  kind: "tree" | "photo";
}

export interface TreeViewCallbacks {
  onNodeClick?: (nodeId: string) => void;
  onPhotoClick?: (nodeId: string, photoId: string) => void;
}

export interface TreeViewOptions {
  width?: number;
  height?: number;
  /** run the simulation on a timer (browser) or tick synchronously (tests) */
  animate?: boolean;
  photoHref?: (photoId: string) => string;
}

const NODE_RADIUS: Record<string, number> = { root: 26, hub: 18, child: 12 };

export class TreeView {
  private readonly svg: d3.Selection<SVGSVGElement, unknown, null, undefined>;
  private readonly tooltip: d3.Selection<HTMLDivElement, unknown, null, undefined>;
  private readonly width: number;
  private readonly height: number;
  private readonly animate: boolean;
  private readonly photoHref?: (photoId: string) => string;
  private readonly positions = new Map<string, { x: number; y: number }>();
  private simulation: d3.Simulation<SimNode, SimLink> | null = null;

  constructor(
    private readonly container: HTMLElement,
    private readonly callbacks: TreeViewCallbacks = {},
    options: TreeViewOptions = {},
  ) {
    this.width = options.width ?? 900;
    this.height = options.height ?? 640;
    this.animate = options.animate ?? true;
    this.photoHref = options.photoHref;
    this.svg = d3
      .select(container)
      .append("svg")
      .attr("class", "tree-canvas")
      .attr("viewBox", `0 0 ${this.width} ${this.height}`);
    this.svg.append("g").attr("class", "links");
    this.svg.append("g").attr("class", "nodes");
    this.tooltip = d3
      .select(container)
      .append("div")
      .attr("class", "tooltip")
      .style("display", "none");
  }

  render(state: ExplorerState): void {
    const visible = visibleNodeIds(state);
    const photoRefs = visiblePhotoNodes(state);

    const simNodes: SimNode[] = visible.map((id) => ({
      id,
      kind: "node",
      nodeId: id,
      label: state.nodes.get(id)!.representative,
      ...this.positions.get(id),
    }));
    for (const ref of photoRefs) {
      const id = `${ref.nodeId}/${ref.photoId}`;
      simNodes.push({
        id,
        kind: "photo",
        nodeId: ref.nodeId,
        label: ref.photoId,
        ...this.positions.get(id),
      });
    }

    const links: SimLink[] = visibleLinks(state).map((l) => ({
      source: l.source,
      target: l.target,
      kind: "tree",
    }));
    for (const ref of photoRefs) {
      links.push({
        source: ref.nodeId,
        target: `${ref.nodeId}/${ref.photoId}`,
        kind: "photo",
      });
    }

    const cx = this.width / 2;
    const cy = this.height / 2;
    for (const node of simNodes) {
      if (node.kind === "node" && node.id === state.rootId) {
        node.fx = cx;
        node.fy = cy;
      }
      if (node.x === undefined) {
        // newcomers start near their parent (or the center) so expansions
        // visually attach to the clicked node
        const parentId =
          node.kind === "photo"
            ? node.nodeId
            : state.nodes.get(node.id)!.parent ?? undefined;
        const anchor = (parentId && this.positions.get(parentId)) || { x: cx, y: cy };
        node.x = anchor.x + (Math.random() - 0.5) * 40;
        node.y = anchor.y + (Math.random() - 0.5) * 40;
      }
    }

    this.simulation?.stop();
    const simulation = d3
      .forceSimulation<SimNode>(simNodes)
      .force(
        "link",
        d3
          .forceLink<SimNode, SimLink>(links)
          .id((d) => d.id)
          .distance((l) => (l.kind === "photo" ? 46 : 120))
          .strength((l) => (l.kind === "photo" ? 0.9 : 0.5)),
      )
      .force("charge", d3.forceManyBody<SimNode>().strength(-260))
      .force("center", d3.forceCenter(cx, cy))
      .force(
        "collide",
        d3.forceCollide<SimNode>((d) => (d.kind === "photo" ? 18 : 34)),
      );
    this.simulation = simulation;

    const draw = () => this.draw(simNodes, links, state);
    if (this.animate) {
      simulation.on("tick", draw);
    } else {
      simulation.stop();
      for (let i = 0; i < 150; i += 1) simulation.tick();
      draw();
    }
  }

  private draw(simNodes: SimNode[], links: SimLink[], state: ExplorerState): void {
    for (const node of simNodes) {
      this.positions.set(node.id, { x: node.x ?? 0, y: node.y ?? 0 });
    }

    this.svg
      .select<SVGGElement>("g.links")
      .selectAll<SVGLineElement, SimLink>("line")
      .data(links, (d) => `${(d.source as SimNode).id}->${(d.target as SimNode).id}`)
      .join("line")
      .attr("class", (d) => `link link-${d.kind}`)
      .attr("x1", (d) => (d.source as SimNode).x ?? 0)
      .attr("y1", (d) => (d.source as SimNode).y ?? 0)
      .attr("x2", (d) => (d.target as SimNode).x ?? 0)
      .attr("y2", (d) => (d.target as SimNode).y ?? 0);

    const groups = this.svg
      .select<SVGGElement>("g.nodes")
      .selectAll<SVGGElement, SimNode>("g.entity")
      .data(simNodes, (d) => d.id)
      .join((enter) => {
        const g = enter.append("g").attr("class", "entity");
        g.filter((d) => d.kind === "node")
          .call((sel) => {
            sel.append("circle");
            sel
              .append("text")
              .attr("class", "label")
              .attr("text-anchor", "middle");
          });
        g.filter((d) => d.kind === "photo").call((sel) => {
          const size = 26;
          if (this.photoHref) {
            sel
              .append("image")
              .attr("width", size)
              .attr("height", size)
              .attr("href", (d) => this.photoHref!(d.label));
          }
          sel
            .append("rect")
            .attr("width", size)
            .attr("height", size)
            .attr("class", this.photoHref ? "photo-frame" : "photo-fill");
        });
        return g;
      });

    groups
      .attr("transform", (d) => `translate(${d.x ?? 0}, ${d.y ?? 0})`)
      .attr("data-kind", (d) => d.kind)
      .attr("data-id", (d) => d.id)
      .attr("data-node-id", (d) => d.nodeId)
      .attr("class", (d) => {
        const classes = ["entity"];
        if (d.kind === "node") {
          classes.push("tree-node", `role-${state.nodes.get(d.id)!.role}`);
          if (state.selectedNodeIds.has(d.id)) classes.push("selected");
          if (state.focusedNodeId === d.id) classes.push("focused");
          if (state.searchHits.has(d.id)) classes.push("search-hit");
        } else {
          classes.push("photo-node");
        }
        return classes.join(" ");
      });

    groups
      .filter((d) => d.kind === "node")
      .select("circle")
      .attr("r", (d) => NODE_RADIUS[state.nodes.get(d.id)!.role] ?? 12);
    groups
      .filter((d) => d.kind === "node")
      .select("text.label")
      .attr("dy", (d) => NODE_RADIUS[state.nodes.get(d.id)!.role] + 14)
      .text((d) => d.label);
    groups
      .filter((d) => d.kind === "photo")
      .selectAll<SVGElement, SimNode>("rect, image")
      .attr("x", -13)
      .attr("y", -13);

    groups
      .on("click", (_event: unknown, d: SimNode) => {
        if (d.kind === "node") this.callbacks.onNodeClick?.(d.id);
        else this.callbacks.onPhotoClick?.(d.nodeId, d.label);
      })
      .on("mouseenter", (_event: unknown, d: SimNode) => {
        if (d.kind !== "photo") return;
        const members = state.nodes.get(d.nodeId)?.members ?? [];
        this.showTooltip(`${d.label}: ${members.join(", ")}`, d.x ?? 0, d.y ?? 0);
      })
      .on("mouseleave", () => this.hideTooltip());
  }

  private showTooltip(text: string, x: number, y: number): void {
    this.tooltip
      .style("display", "block")
      .style("left", `${x + 18}px`)
      .style("top", `${y + 18}px`)
      .text(text);
  }

  private hideTooltip(): void {
    this.tooltip.style("display", "none");
  }

  /** Rendered tree-node ids, for tests. */
  renderedNodeIds(): string[] {
    const ids: string[] = [];
    this.svg.selectAll<SVGGElement, SimNode>("g.entity[data-kind='node']").each(function () {
      ids.push(this.getAttribute("data-id")!);
    });
    return ids.sort();
  }

  /** Rendered photo-node keys nodeId/photoId, for tests. */
  renderedPhotoKeys(): string[] {
    const ids: string[] = [];
    this.svg.selectAll<SVGGElement, SimNode>("g.entity[data-kind='photo']").each(function () {
      ids.push(this.getAttribute("data-id")!);
    });
    return ids.sort();
  }

  dispose(): void {
    this.simulation?.stop();
    d3.select(this.container).selectAll("*").remove();
  }
}
