/** Feature-cluster legends plus the per-feature importance histogram panel. */

import { encodingFor } from "./palette";
import type { LegendFeature, LegendRec } from "./types";

export interface LegendCallbacks {
  onFeatureClick(feature: LegendFeature): void;
}

export function renderLegends(
  container: HTMLElement,
  legends: LegendRec[],
  visibleClusters: Set<number>,
  selectedFeatures: Set<string>,
  callbacks: LegendCallbacks
): void {
  container.textContent = "";
  container.classList.add("legends");
  // clusters present in the current summary come first
  const ordered = [...legends].sort((a, b) => {
    const av = visibleClusters.has(a.cluster) ? 0 : 1;
    const bv = visibleClusters.has(b.cluster) ? 0 : 1;
    return av - bv || a.cluster - b.cluster;
  });
  for (const legend of ordered) {
    const enc = encodingFor(legend.cluster);
    const box = document.createElement("div");
    box.className = "legend";
    box.dataset.cluster = String(legend.cluster);
    if (!visibleClusters.has(legend.cluster)) box.classList.add("legend-hidden");

    const head = document.createElement("div");
    head.className = `legend-swatch texture-${enc.texture}`;
    head.style.background = enc.color;
    head.textContent = `features ${legend.cluster}`;
    if (enc.reused) {
      head.title = "encoding reused: more than 48 feature clusters";
      head.classList.add("legend-reused");
    }
    box.appendChild(head);

    const list = document.createElement("ul");
    for (const feature of legend.features) {
      const item = document.createElement("li");
      const btn = document.createElement("button");
      btn.className = "feature";
      btn.dataset.featureId = feature.id;
      btn.dataset.mass = String(feature.mass);
      btn.textContent = feature.name;
      if (selectedFeatures.has(feature.id)) btn.classList.add("feature-selected");
      btn.addEventListener("click", () => callbacks.onFeatureClick(feature));
      item.appendChild(btn);
      list.appendChild(item);
    }
    box.appendChild(list);
    container.appendChild(box);
  }
}

/** Bar panel for one feature's global importance histogram. */
export function renderFeatureHistogram(
  container: HTMLElement,
  feature: LegendFeature | null
): void {
  container.textContent = "";
  container.classList.add("feature-histogram");
  if (feature === null) {
    container.classList.add("feature-histogram-empty");
    return;
  }
  const title = document.createElement("div");
  title.className = "panel-title";
  title.textContent = `${feature.name} — importance distribution`;
  container.appendChild(title);
  const chart = document.createElement("div");
  chart.className = "hist-bars";
  const hi = Math.max(...feature.hist, 1e-300);
  feature.hist.forEach((v, i) => {
    const bar = document.createElement("div");
    bar.className = "hist-bar";
    bar.dataset.bin = String(i);
    bar.dataset.value = String(v);
    bar.style.height = `${((v / hi) * 60).toFixed(1)}px`;
    chart.appendChild(bar);
  });
  container.appendChild(chart);
}
