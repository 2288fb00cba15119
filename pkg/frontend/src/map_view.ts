/**
 * Spot results: a pannable coordinate plot with markers plus a ranked list,
 * and a details text area filled when a marker (or list row) is clicked.
 *
 * The plot is a plain equirectangular projection of the returned lat/lng
 * values; it deliberately needs no map-tile service so the whole client
 * stays testable offline. Rank order always mirrors the service response.
 */

import * as d3 from "d3";

import type { SpotData } from "./api";

export class MapView {
  private readonly root: d3.Selection<HTMLDivElement, unknown, null, undefined>;
  private readonly svg: d3.Selection<SVGSVGElement, unknown, null, undefined>;
  private readonly list: d3.Selection<HTMLOListElement, unknown, null, undefined>;
  private readonly details: d3.Selection<HTMLPreElement, unknown, null, undefined>;
  private readonly width = 460;
  private readonly height = 340;
  private spots: SpotData[] = [];

  constructor(container: HTMLElement) {
    this.root = d3.select(container).append("div").attr("class", "map-view");
    this.svg = this.root
      .append("svg")
      .attr("class", "map-canvas")
      .attr("viewBox", `0 0 ${this.width} ${this.height}`);
    const pane = this.svg.append("g").attr("class", "pane");
    this.svg.call(
      d3
        .zoom<SVGSVGElement, unknown>()
        .scaleExtent([0.5, 12])
        .on("zoom", (event) => pane.attr("transform", event.transform)),
    );
    this.list = this.root.append("ol").attr("class", "spot-list");
    this.details = this.root
      .append("pre")
      .attr("class", "spot-details")
      .text("Click a marker for details.");
  }

  show(spots: SpotData[]): void {
    this.spots = spots;
    const pane = this.svg.select<SVGGElement>("g.pane");

    const lats = spots.map((s) => s.lat);
    const lngs = spots.map((s) => s.lng);
    const pad = 0.02;
    const x = d3
      .scaleLinear()
      .domain(
        spots.length
          ? [Math.min(...lngs) - pad, Math.max(...lngs) + pad]
          : [0, 1],
      )
      .range([20, this.width - 20]);
    const y = d3
      .scaleLinear()
      .domain(
        spots.length
          ? [Math.min(...lats) - pad, Math.max(...lats) + pad]
          : [0, 1],
      )
      .range([this.height - 20, 20]); // north up

    pane
      .selectAll<SVGGElement, SpotData>("g.marker")
      .data(spots, (d) => d.spot_id)
      .join((enter) => {
        const g = enter.append("g").attr("class", "marker");
        g.append("circle").attr("r", 9);
        g.append("text").attr("class", "marker-rank").attr("dy", 4).attr("text-anchor", "middle");
        return g;
      })
      .attr("transform", (d) => `translate(${x(d.lng)}, ${y(d.lat)})`)
      .attr("data-spot-id", (d) => d.spot_id)
      .on("click", (_event: unknown, d: SpotData) => this.showDetails(d.spot_id))
      .select("text.marker-rank")
      .text((d) => String(spots.indexOf(d) + 1));

    this.list
      .selectAll<HTMLLIElement, SpotData>("li")
      .data(spots, (d) => d.spot_id)
      .join("li")
      .attr("data-spot-id", (d) => d.spot_id)
      .text(
        (d) =>
          `${d.name} - photos ${d.nearby_count}, relevance ${d.relevance.toFixed(2)}` +
          (d.review_score === null ? "" : `, review ${d.review_score.toFixed(1)}`),
      )
      .on("click", (_event: unknown, d: SpotData) => this.showDetails(d.spot_id));

    this.details.text(
      spots.length ? "Click a marker for details." : "No spots returned.",
    );
  }

  showDetails(spotId: string): void {
    const rank = this.spots.findIndex((s) => s.spot_id === spotId);
    const spot = this.spots[rank];
    if (!spot) return;
    const lines = [
      `#${rank + 1} ${spot.name}`,
      spot.details?.description ?? "(no details)",
    ];
    if (spot.details?.address) lines.push(spot.details.address);
    if (spot.details?.url) lines.push(spot.details.url);
    this.details.text(lines.join("\n"));
  }

  /** Marker order in the list panel, for tests. */
  renderedOrder(): string[] {
    const ids: string[] = [];
    this.list.selectAll<HTMLLIElement, SpotData>("li").each(function () {
      ids.push(this.getAttribute("data-spot-id")!);
    });
    return ids;
  }

  detailsText(): string {
    return this.details.text();
  }
}
