/** Subset drill-down table: instances of a selected cluster or co-cluster. */

import type { SubsetDoc } from "./types";

const TOP_FEATURES = 3;

export function renderSubsetTable(
  container: HTMLElement,
  subset: SubsetDoc | null
): void {
  container.textContent = "";
  container.classList.add("subset");
  if (subset === null) {
    const hint = document.createElement("div");
    hint.className = "placeholder";
    hint.textContent = "click a row cluster or co-cluster to inspect instances";
    container.appendChild(hint);
    return;
  }
  const title = document.createElement("div");
  title.className = "panel-title";
  title.textContent =
    subset.col_cluster === null
      ? `instances of cluster ${subset.row_cluster}`
      : `co-cluster (${subset.row_cluster}, ${subset.col_cluster})`;
  container.appendChild(title);

  // per-instance top features by value
  const byInstance = new Map<number, Array<[number, number]>>();
  for (const [li, lj, v] of subset.entries) {
    if (!byInstance.has(li)) byInstance.set(li, []);
    byInstance.get(li)!.push([lj, v]);
  }

  const table = document.createElement("table");
  const head = document.createElement("tr");
  for (const label of ["instance", "class", "prediction", "top features"]) {
    const th = document.createElement("th");
    th.textContent = label;
    head.appendChild(th);
  }
  table.appendChild(head);
  subset.instances.forEach((inst, li) => {
    const tr = document.createElement("tr");
    tr.className = inst.correct ? "correct" : "incorrect";
    tr.dataset.instance = inst.id;
    const cells = [inst.id, inst.class, inst.pred];
    for (const value of cells) {
      const td = document.createElement("td");
      td.textContent = value;
      tr.appendChild(td);
    }
    const top = (byInstance.get(li) ?? [])
      .sort((a, b) => b[1] - a[1] || a[0] - b[0])
      .slice(0, TOP_FEATURES)
      .map(([lj, v]) => `${subset.features[lj].name} (${v})`);
    const td = document.createElement("td");
    td.className = "top-features";
    td.textContent = top.join(", ");
    tr.appendChild(td);
    table.appendChild(tr);
  });
  container.appendChild(table);
}
