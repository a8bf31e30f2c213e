/** Payload shapes mirrored from the service's versioned JSON schemas.
 * The UI renders these verbatim; it never recomputes a probability. */

export type OutcomeKind = "survival" | "cif";

export interface AdjusterEntry {
  value: number | string;
  source: "default" | "user";
}

export interface Histogram {
  edges: number[];
  counts: number[];
}

export interface ContourSurface {
  schema_version: number;
  outcome_kind: OutcomeKind;
  time_grid: number[];
  predictor_grid: number[];
  prob: number[][];
  lower?: number[][];
  upper?: number[][];
  histogram: Histogram;
  adjusters: Record<string, AdjusterEntry>;
  panels?: { stratum: string; surface: ContourSurface }[];
  flags: Record<string, unknown>;
}

export interface QuantileCurves {
  schema_version: number;
  outcome_kind: OutcomeKind;
  levels: number[];
  predictor_values: number[];
  time_grid: number[];
  curves: number[][];
  lower?: number[][];
  upper?: number[][];
  adjusters: Record<string, AdjusterEntry>;
  flags: Record<string, unknown>;
}

export interface Surface3D {
  schema_version: number;
  outcome_kind: OutcomeKind;
  time_grid: number[];
  predictor_grid: number[];
  z: number[][];
  ci_layers?: { lower: number[][]; upper: number[][]; render: string };
  panels?: { stratum: string; surface: Surface3D }[];
  flags: Record<string, unknown>;
}

export interface MetricsReport {
  c_index: number;
  comparable_pairs: number;
  integrated_brier: number | null;
  window: [number, number] | null;
  brier_times: number[] | null;
  brier_values: number[] | null;
}

export interface KMSplitGroup {
  label: string;
  n: number;
  knots: number[];
  survival: number[];
  variance: number[];
  all_censored: boolean;
}

export interface KMSplit {
  threshold: number;
  groups: KMSplitGroup[];
}

export interface ColumnRoles {
  time_column: string;
  status_column: string;
  predictor: string;
  adjusters: string[];
  strata: string | null;
  cause_of_interest: number;
}

export interface ModelSpec {
  family: Family;
  roles: ColumnRoles;
  options: Record<string, unknown>;
}

export type Family =
  | "kaplan_meier"
  | "cox"
  | "stratified_cox"
  | "parametric"
  | "fine_gray"
  | "rsf";

export type JobState = "queued" | "running" | "done" | "failed";

export interface JobRecord {
  id: string;
  state: JobState;
  dataset_id: string;
  spec: ModelSpec;
  created: number;
  finished: number | null;
  error: string | null;
}

export interface ContinuousColumnSummary {
  kind: "continuous";
  min: number;
  max: number;
  median: number;
}

export interface CategoricalColumnSummary {
  kind: "categorical";
  levels: string[];
  counts: number[];
}

export interface DatasetSummary {
  n: number;
  follow_up: [number, number];
  events: Record<string, number>;
  censored: number;
  columns: Record<string, ContinuousColumnSummary | CategoricalColumnSummary>;
  strata?: { column: string; levels: string[]; counts: number[] };
}

export interface IngestionReport {
  rows_in: number;
  rows_kept: number;
  drops: { reason: string; count: number }[];
}

export interface UploadResponse {
  dataset_id: string;
  report: IngestionReport;
}
