// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from "vitest";

import { ExplorerApp, type AppRegions } from "../src/app";
import { fixture, mountRegions, StubClient } from "./stub";
import type { FilterView } from "../src/types";

let regions: AppRegions;
let client: StubClient;
let app: ExplorerApp;

async function flush(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 0));
}

beforeEach(async () => {
  regions = mountRegions() as unknown as AppRegions;
  client = new StubClient();
  app = new ExplorerApp(regions, client);
  await app.start();
  await flush();
});

describe("explorer against the recorded service", () => {
  it("renders two adjacency rows with masses 0.4 and 0.6", () => {
    const rows = regions.adjacency.querySelectorAll(".adjacency-row");
    expect(rows.length).toBe(2);
    const masses = [
      ...regions.adjacency.querySelectorAll<HTMLElement>(".block"),
    ].map((b) => Number(b.dataset.mass));
    expect(masses.sort()).toEqual([0.4, 0.6]);
  });

  it("applying a class filter updates flow fills to service fractions", async () => {
    const checkbox = regions.controls.querySelector<HTMLInputElement>(
      'input[data-class="B"]'
    )!;
    checkbox.checked = false;
    checkbox.dispatchEvent(new Event("change"));
    await flush();

    const served = fixture<FilterView>("filter-class-A");
    const fills = new Map(
      [...regions.flow.querySelectorAll<SVGRectElement>(".class-fill")].map(
        (r) => [
          r.getAttribute("data-class"),
          Number(r.getAttribute("data-fraction")),
        ]
      )
    );
    for (const ct of served.classes) {
      expect(fills.get(ct.class)).toBeCloseTo(
        ct.total > 0 ? ct.retained / ct.total : 0,
        12
      );
    }
    // class B has zero fill after the filter
    expect(fills.get("B")).toBe(0);
    // only cluster 1 remains in the adjacency list
    const rows = [
      ...regions.adjacency.querySelectorAll<HTMLElement>(".adjacency-row"),
    ].map((r) => r.dataset.cluster);
    expect(rows).toEqual(["1"]);
  });

  it("clicking co-cluster (2,2) lists exactly r3 and r4 in the subset table", async () => {
    const block = regions.adjacency.querySelector<HTMLElement>(
      '.block[data-r="2"][data-c="2"]'
    )!;
    block.click();
    await flush();
    const ids = [
      ...regions.subset.querySelectorAll<HTMLElement>("tr[data-instance]"),
    ].map((tr) => tr.dataset.instance);
    expect(ids).toEqual(["r3", "r4"]);
    expect(client.calls).toContain("POST /subset 2 2 0");
  });

  it("raising the block-mean threshold empties the view", async () => {
    const slider = regions.controls.querySelector<HTMLInputElement>(
      'input[data-control="min_mean_value"]'
    )!;
    slider.value = "0.25";
    slider.dispatchEvent(new Event("change"));
    await flush();
    expect(
      regions.adjacency.querySelector(".placeholder")?.textContent
    ).toMatch(/no clusters/);
  });

  it("selecting a feature then clearing restores the initial view", async () => {
    const initial = regions.adjacency.innerHTML;
    const feature = regions.legends.querySelector<HTMLElement>(
      'button[data-feature-id="c4"]'
    )!;
    feature.click();
    await flush();
    const filtered = [
      ...regions.adjacency.querySelectorAll<HTMLElement>(".adjacency-row"),
    ].map((r) => r.dataset.cluster);
    expect(filtered).toEqual(["2"]); // only r3/r4 touch c4
    const clear = regions.controls.querySelector<HTMLButtonElement>(
      'button[data-control="clear"]'
    )!;
    clear.click();
    await flush();
    expect(regions.adjacency.innerHTML).toBe(initial);
  });

  it("feature clicks also open the importance histogram panel", async () => {
    const feature = regions.legends.querySelector<HTMLElement>(
      'button[data-feature-id="c4"]'
    )!;
    feature.click();
    await flush();
    const bars = regions.featurePanel.querySelectorAll(".hist-bar");
    expect(bars.length).toBe(20);
  });

  it("displayed numbers equal the service payload fields", () => {
    const served = fixture<FilterView>("filter-empty");
    const blockEls = [
      ...regions.adjacency.querySelectorAll<HTMLElement>(".block"),
    ];
    for (const b of served.blocks) {
      const el = blockEls.find(
        (e) => e.dataset.r === String(b.r) && e.dataset.c === String(b.c)
      )!;
      expect(Number(el.dataset.mass)).toBe(b.mass);
      expect(Number(el.dataset.nnz)).toBe(b.nnz);
      expect(Number(el.dataset.mean)).toBe(b.mean);
    }
  });

  it("surfaces service errors inline without losing state", async () => {
    const before = regions.adjacency.innerHTML;
    // co-cluster (1,1) has no recording: the stub rejects like a 404
    const block = regions.adjacency.querySelector<HTMLElement>(
      '.block[data-r="1"][data-c="1"]'
    )!;
    block.click();
    await flush();
    expect(regions.status.textContent).toMatch(/service error/);
    expect(regions.adjacency.innerHTML).toBe(before);
  });
});
