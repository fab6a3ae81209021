/** Payload shapes of the summary service (summary-json v1 and friends). */

export interface InstanceRec {
  id: string;
  class: string;
  pred: string;
  correct: boolean;
  nnz: number[];
}

export interface RowGroup {
  cluster: number;
  instances: InstanceRec[];
}

export interface ColGroup {
  cluster: number;
  features: number[];
}

export interface BlockRec {
  r: number;
  c: number;
  mass: number;
  nnz: number;
  mean: number;
  hist: number[];
}

export interface FlowRec {
  class: string;
  cluster: number;
  correct: number;
  incorrect: number;
}

export interface LegendFeature {
  col: number;
  id: string;
  name: string;
  group: string | null;
  mass: number;
  hist: number[];
}

export interface LegendRec {
  cluster: number;
  features: LegendFeature[];
}

export interface SummaryDoc {
  meta: {
    config: Record<string, unknown>;
    seed: number;
    cost: { model: number; loss: number; total: number };
  };
  rows: RowGroup[];
  cols: ColGroup[];
  blocks: BlockRec[];
  flows: FlowRec[];
  legends: LegendRec[];
}

export interface FilterSpecDoc {
  classes: string[] | null;
  features: string[] | null;
  outcome: "any" | "correct" | "incorrect";
  min_cluster_size: number;
  min_mean_value: number;
}

export interface ClassTotal {
  class: string;
  total: number;
  retained: number;
}

export interface FilterView {
  spec: FilterSpecDoc;
  classes: ClassTotal[];
  rows: RowGroup[];
  cols: ColGroup[];
  blocks: BlockRec[];
  flows: FlowRec[];
}

export interface SubsetInstance {
  id: string;
  class: string;
  pred: string;
  correct: boolean;
}

export interface SubsetDoc {
  row_cluster: number;
  col_cluster: number | null;
  threshold: number;
  instances: SubsetInstance[];
  features: { id: string; name: string }[];
  entries: [number, number, number][];
}

export const EMPTY_SPEC: FilterSpecDoc = {
  classes: null,
  features: null,
  outcome: "any",
  min_cluster_size: 0,
  min_mean_value: 0,
};
