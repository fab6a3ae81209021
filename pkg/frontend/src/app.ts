/** Wires the views together: every interaction refilters or drills down. */

import { renderAdjacencyList } from "./adjacency";
import type { ServiceClient } from "./client";
import { renderControls } from "./controls";
import { renderFlow } from "./flow";
import { renderFeatureHistogram, renderLegends } from "./legends";
import {
  clearedSelections,
  initialState,
  reconcile,
  withFeatureToggled,
  type ViewState,
} from "./state";
import { renderSubsetTable } from "./subset";
import type {
  FilterSpecDoc,
  FilterView,
  LegendFeature,
  SubsetDoc,
  SummaryDoc,
} from "./types";

export interface AppRegions {
  flow: HTMLElement;
  adjacency: HTMLElement;
  legends: HTMLElement;
  controls: HTMLElement;
  subset: HTMLElement;
  featurePanel: HTMLElement;
  status: HTMLElement;
}

export class ExplorerApp {
  state: ViewState = initialState();
  summary: SummaryDoc | null = null;
  view: FilterView | null = null;
  subsetDoc: SubsetDoc | null = null;
  featurePanel: LegendFeature | null = null;

  constructor(
    private readonly regions: AppRegions,
    private readonly client: ServiceClient
  ) {}

  async start(): Promise<void> {
    this.summary = await this.client.getSummary();
    await this.refilter(this.state.spec);
  }

  private async refilter(spec: FilterSpecDoc): Promise<void> {
    this.state = { ...this.state, spec };
    try {
      const view = await this.client.postFilter(spec);
      this.view = view;
      this.state = reconcile(this.state, view);
      this.subsetDoc = null;
      this.render();
    } catch (err) {
      this.showError(err);
    }
  }

  private async openSubset(r: number, c: number | null): Promise<void> {
    try {
      this.subsetDoc = await this.client.postSubset(r, c, 0.0);
      this.state = {
        ...this.state,
        selectedRowCluster: r,
        selectedCoCluster: c === null ? null : { r, c },
      };
      this.render();
    } catch (err) {
      this.showError(err);
    }
  }

  private showError(err: unknown): void {
    // state stays untouched; the failure is surfaced inline
    this.regions.status.textContent = `service error: ${String(err)}`;
    this.regions.status.classList.add("error");
  }

  render(): void {
    const summary = this.summary;
    const view = this.view;
    if (!summary || !view) return;
    this.regions.status.textContent = "";
    this.regions.status.classList.remove("error");

    const colSizes = new Map<number, number>(
      summary.cols.map((g) => [g.cluster, g.features.length])
    );
    renderAdjacencyList(
      this.regions.adjacency,
      view.rows,
      view.blocks,
      colSizes,
      this.state.sortOrder,
      {
        onRowClick: (cluster) => void this.openSubset(cluster, null),
        onBlockClick: (r, c) => void this.openSubset(r, c),
      }
    );
    renderFlow(
      this.regions.flow,
      view.classes,
      view.flows,
      view.rows.map((g) => g.cluster),
      { onClusterClick: (cluster) => void this.openSubset(cluster, null) }
    );
    renderLegends(
      this.regions.legends,
      summary.legends,
      new Set(view.blocks.map((b) => b.c)),
      new Set(this.state.selectedFeatures),
      {
        onFeatureClick: (feature) => {
          this.featurePanel = feature;
          this.state = withFeatureToggled(this.state, feature.id);
          void this.refilter(this.state.spec);
        },
      }
    );
    renderFeatureHistogram(this.regions.featurePanel, this.featurePanel);
    renderControls(
      this.regions.controls,
      summary.rows
        .flatMap((g) => g.instances.map((i) => i.class))
        .filter((v, i, arr) => arr.indexOf(v) === i)
        .sort(),
      this.state.spec,
      Math.max(...summary.rows.map((g) => g.instances.length)),
      // headroom so the threshold can pass above every block
      Math.max(...summary.blocks.map((b) => b.mean)) * 1.25,
      {
        onSpecChange: (spec) => void this.refilter(spec),
        onClear: () => {
          this.featurePanel = null;
          this.state = clearedSelections(this.state);
          void this.refilter(this.state.spec);
        },
      }
    );
    renderSubsetTable(this.regions.subset, this.subsetDoc);
  }
}
