/** Adjacency-list view: one row per instance cluster, mass-ordered blocks. */

import { encodingFor, histogramGradient } from "./palette";
import type { SortOrder } from "./state";
import type { BlockRec, RowGroup } from "./types";

export interface AdjacencyCallbacks {
  onRowClick(cluster: number): void;
  onBlockClick(r: number, c: number): void;
}

const ROW_PX_PER_INSTANCE = 1.2;
const MIN_ROW_PX = 22;
const MAX_ROW_PX = 64;
const BLOCK_PX_PER_FEATURE = 14;
const MIN_BLOCK_PX = 36;

export function renderAdjacencyList(
  container: HTMLElement,
  rows: RowGroup[],
  blocks: BlockRec[],
  colSizes: Map<number, number>,
  sortOrder: SortOrder,
  callbacks: AdjacencyCallbacks
): void {
  container.textContent = "";
  container.classList.add("adjacency");
  const massOf = new Map<number, number>();
  for (const b of blocks) {
    massOf.set(b.r, (massOf.get(b.r) ?? 0) + b.mass);
  }
  // a row with every block filtered away carries nothing to show
  const visible = rows.filter((g) => massOf.has(g.cluster));
  if (visible.length === 0) {
    const empty = document.createElement("div");
    empty.className = "placeholder";
    empty.textContent = "no clusters match the current filters";
    container.appendChild(empty);
    return;
  }
  const ordered = [...visible].sort((a, b) =>
    sortOrder === "size"
      ? b.instances.length - a.instances.length || a.cluster - b.cluster
      : (massOf.get(b.cluster) ?? 0) - (massOf.get(a.cluster) ?? 0) ||
        a.cluster - b.cluster
  );
  for (const group of ordered) {
    const rowEl = document.createElement("div");
    rowEl.className = "adjacency-row";
    rowEl.dataset.cluster = String(group.cluster);
    const h = Math.min(
      MAX_ROW_PX,
      Math.max(MIN_ROW_PX, group.instances.length * ROW_PX_PER_INSTANCE)
    );
    rowEl.style.height = `${h.toFixed(1)}px`;

    const label = document.createElement("button");
    label.className = "row-label";
    label.textContent = `#${group.cluster} (${group.instances.length})`;
    label.dataset.size = String(group.instances.length);
    label.addEventListener("click", () => callbacks.onRowClick(group.cluster));
    rowEl.appendChild(label);

    // service order within a row is already by descending mass
    for (const block of blocks.filter((b) => b.r === group.cluster)) {
      const enc = encodingFor(block.c);
      const el = document.createElement("button");
      el.className = `block texture-${enc.texture}`;
      el.dataset.r = String(block.r);
      el.dataset.c = String(block.c);
      el.dataset.mass = String(block.mass);
      el.dataset.nnz = String(block.nnz);
      el.dataset.mean = String(block.mean);
      const w = Math.max(
        MIN_BLOCK_PX,
        (colSizes.get(block.c) ?? 1) * BLOCK_PX_PER_FEATURE
      );
      el.style.width = `${w}px`;
      el.style.background = histogramGradient(block.hist, enc.hue);
      el.style.borderColor = enc.color;
      el.title = `cluster ${block.r} x features ${block.c}: mass ${block.mass}`;
      el.addEventListener("click", () => callbacks.onBlockClick(block.r, block.c));
      rowEl.appendChild(el);
    }
    container.appendChild(rowEl);
  }
}
