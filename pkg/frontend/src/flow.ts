/** Class-to-cluster data flow: rectangles per class, grey/red ribbons. */

import type { ClassTotal, FlowRec } from "./types";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 320;
const CLASS_X = 10;
const CLASS_W = 26;
const CLUSTER_X = WIDTH - 36;
const CLUSTER_W = 26;
const GAP = 8;
const PX_PER_INSTANCE = 2.0;
const MIN_H = 10;
const CORRECT_COLOR = "#9a9a9a";
const INCORRECT_COLOR = "#d64541";

export interface FlowCallbacks {
  onClusterClick(cluster: number): void;
}

function ribbonPath(
  x0: number,
  y0: number,
  h0: number,
  x1: number,
  y1: number,
  h1: number
): string {
  const cp = (x1 - x0) * 0.45;
  return (
    `M${x0},${y0} C${x0 + cp},${y0} ${x1 - cp},${y1} ${x1},${y1}` +
    `L${x1},${y1 + h1} C${x1 - cp},${y1 + h1} ${x0 + cp},${y0 + h0} ${x0},${y0 + h0} Z`
  );
}

export function renderFlow(
  container: HTMLElement,
  classes: ClassTotal[],
  flows: FlowRec[],
  clusterOrder: number[],
  callbacks: FlowCallbacks
): void {
  container.textContent = "";
  container.classList.add("flow");
  if (classes.length === 0 || clusterOrder.length === 0) {
    const empty = document.createElement("div");
    empty.className = "placeholder";
    empty.textContent = "no flows to display";
    container.appendChild(empty);
    return;
  }
  const svg = document.createElementNS(SVG_NS, "svg");
  const scale = (n: number) => Math.max(MIN_H, n * PX_PER_INSTANCE);

  // left column: one rectangle per class, fill proportional to retained
  const classY = new Map<string, number>();
  let y = GAP;
  for (const ct of classes) {
    const h = scale(ct.total);
    const frame = document.createElementNS(SVG_NS, "rect");
    frame.setAttribute("x", String(CLASS_X));
    frame.setAttribute("y", String(y));
    frame.setAttribute("width", String(CLASS_W));
    frame.setAttribute("height", h.toFixed(1));
    frame.setAttribute("class", "class-frame");
    frame.setAttribute("fill", "#f2f2f2");
    frame.setAttribute("stroke", "#555");
    frame.setAttribute("data-class", ct.class);
    frame.setAttribute("data-total", String(ct.total));
    svg.appendChild(frame);

    const fillFraction = ct.total > 0 ? ct.retained / ct.total : 0;
    const fill = document.createElementNS(SVG_NS, "rect");
    fill.setAttribute("x", String(CLASS_X));
    fill.setAttribute("y", (y + h * (1 - fillFraction)).toFixed(1));
    fill.setAttribute("width", String(CLASS_W));
    fill.setAttribute("height", (h * fillFraction).toFixed(1));
    fill.setAttribute("class", "class-fill");
    fill.setAttribute("fill", "#5b8db8");
    fill.setAttribute("data-class", ct.class);
    fill.setAttribute("data-retained", String(ct.retained));
    fill.setAttribute("data-fraction", String(fillFraction));
    svg.appendChild(fill);

    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("x", String(CLASS_X + CLASS_W + 4));
    text.setAttribute("y", (y + h / 2 + 4).toFixed(1));
    text.setAttribute("class", "class-name");
    text.textContent = ct.class;
    svg.appendChild(text);

    classY.set(ct.class, y);
    y += h + GAP;
  }
  const leftHeight = y;

  // right column: one rectangle per visible instance cluster
  const clusterRetained = new Map<number, number>();
  for (const f of flows) {
    clusterRetained.set(
      f.cluster,
      (clusterRetained.get(f.cluster) ?? 0) + f.correct + f.incorrect
    );
  }
  const clusterY = new Map<number, number>();
  y = GAP;
  for (const cluster of clusterOrder) {
    const h = scale(clusterRetained.get(cluster) ?? 0);
    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", String(CLUSTER_X));
    rect.setAttribute("y", String(y));
    rect.setAttribute("width", String(CLUSTER_W));
    rect.setAttribute("height", h.toFixed(1));
    rect.setAttribute("class", "cluster-node");
    rect.setAttribute("fill", "#ddd");
    rect.setAttribute("stroke", "#555");
    rect.setAttribute("data-cluster", String(cluster));
    rect.addEventListener("click", () => callbacks.onClusterClick(cluster));
    svg.appendChild(rect);
    clusterY.set(cluster, y);
    y += h + GAP;
  }

  // ribbons, split into correct (grey) and incorrect (red) widths
  const classOffset = new Map<string, number>();
  const clusterOffset = new Map<number, number>();
  for (const flow of flows) {
    if (!classY.has(flow.class) || !clusterY.has(flow.cluster)) continue;
    const segments: Array<["correct" | "incorrect", number, string]> = [
      ["correct", flow.correct, CORRECT_COLOR],
      ["incorrect", flow.incorrect, INCORRECT_COLOR],
    ];
    for (const [kind, count, color] of segments) {
      if (count <= 0) continue;
      const h = count * PX_PER_INSTANCE;
      const y0 =
        classY.get(flow.class)! + (classOffset.get(flow.class) ?? 0);
      const y1 =
        clusterY.get(flow.cluster)! + (clusterOffset.get(flow.cluster) ?? 0);
      const path = document.createElementNS(SVG_NS, "path");
      path.setAttribute(
        "d",
        ribbonPath(CLASS_X + CLASS_W, y0, h, CLUSTER_X, y1, h)
      );
      path.setAttribute("fill", color);
      path.setAttribute("fill-opacity", "0.65");
      path.setAttribute("class", `ribbon ribbon-${kind}`);
      path.setAttribute("data-class", flow.class);
      path.setAttribute("data-cluster", String(flow.cluster));
      path.setAttribute("data-count", String(count));
      svg.appendChild(path);
      classOffset.set(flow.class, (classOffset.get(flow.class) ?? 0) + h);
      clusterOffset.set(flow.cluster, (clusterOffset.get(flow.cluster) ?? 0) + h);
    }
  }

  const height = Math.max(leftHeight, y) + GAP;
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${height.toFixed(0)}`);
  svg.setAttribute("width", String(WIDTH));
  svg.setAttribute("height", height.toFixed(0));
  container.appendChild(svg);
}
