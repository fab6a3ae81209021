/** View state: the active filter plus current selections. */

import type { FilterSpecDoc, FilterView } from "./types";
import { EMPTY_SPEC } from "./types";

export type SortOrder = "size" | "mass";

export interface ViewState {
  spec: FilterSpecDoc;
  selectedRowCluster: number | null;
  selectedCoCluster: { r: number; c: number } | null;
  selectedFeatures: string[];
  sortOrder: SortOrder;
}

export function initialState(): ViewState {
  return {
    spec: { ...EMPTY_SPEC },
    selectedRowCluster: null,
    selectedCoCluster: null,
    selectedFeatures: [],
    sortOrder: "size",
  };
}

/** Drop selections that no longer reference ids present in the view. */
export function reconcile(state: ViewState, view: FilterView): ViewState {
  const rowIds = new Set(view.rows.map((g) => g.cluster));
  const blockKeys = new Set(view.blocks.map((b) => `${b.r}:${b.c}`));
  const next = { ...state };
  if (next.selectedRowCluster !== null && !rowIds.has(next.selectedRowCluster)) {
    next.selectedRowCluster = null;
  }
  if (
    next.selectedCoCluster !== null &&
    !blockKeys.has(`${next.selectedCoCluster.r}:${next.selectedCoCluster.c}`)
  ) {
    next.selectedCoCluster = null;
  }
  return next;
}

export function withFeatureToggled(state: ViewState, featureId: string): ViewState {
  const selected = state.selectedFeatures.includes(featureId)
    ? state.selectedFeatures.filter((f) => f !== featureId)
    : [...state.selectedFeatures, featureId];
  return {
    ...state,
    selectedFeatures: selected,
    spec: { ...state.spec, features: selected.length ? [...selected].sort() : null },
  };
}

export function clearedSelections(state: ViewState): ViewState {
  return {
    ...state,
    spec: { ...EMPTY_SPEC },
    selectedRowCluster: null,
    selectedCoCluster: null,
    selectedFeatures: [],
  };
}
