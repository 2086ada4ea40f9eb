// JSON payload shapes of the analysis service.

export interface LayoutPoint {
  id: string;
  x: number;
  y: number;
  group: number;
  outlier: boolean;
}

export interface LayoutMedoid {
  group: number;
  id: string;
  x: number;
  y: number;
}

export interface LayoutControl {
  index: number;
  x: number;
  y: number;
}

export interface LayoutPayload {
  points: LayoutPoint[];
  medoids: LayoutMedoid[];
  controls: LayoutControl[];
}

/** order = feature indices, best first; scores = one value per feature in
 * natural feature order. */
export interface FeatureRanking {
  basis: "group_mean" | "deviation_emd";
  order: number[];
  scores: number[];
  group_id?: number;
}

export interface RankingsPayload {
  feature_names: string[];
  bins: number;
  mean: Record<string, FeatureRanking>;
  deviation: FeatureRanking | null;
}

export interface SelectionPayload {
  indices: number[];
}

export interface SelectedInstancesPayload {
  header: string[];
  rows: (string | number)[][];
  groups: number[] | null;
}

export interface GroupAggregate {
  group_id: number;
  size: number;
  mean_attribution: number[];
}

export interface GroupSplit {
  group_id: number;
  selected_count: number;
  unselected_count: number;
  selected_mean: number[];
  unselected_mean: number[];
}

export interface SplitPayload {
  groups: GroupSplit[];
}

/** Per-group mass over shared bin edges; each group's masses sum to 1. */
export interface FeatureHistogram {
  feature: string;
  bin_edges: number[];
  groups: Record<string, number[]>;
}

export interface PipelineStatus {
  status: "done" | "running" | "error";
  job_id?: string;
  groups?: number;
  timings_ms?: Record<string, number>;
  error?: string;
}

export interface SessionInfo {
  session_id: string;
  config: Record<string, unknown>;
}
