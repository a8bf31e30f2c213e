/** Session state: the uploaded dataset, the chosen model spec, the job
 * lifecycle and the adjuster overrides driving refetches.  Views that
 * need a fitted model stay disabled until the job is done. */

import type {
  DatasetSummary,
  JobState,
  ModelSpec,
} from "./types.js";
import { emptyOverrides, OverrideState } from "./adjusters.js";

export type ViewName = "contour" | "quantiles" | "surface3d" | "kmsplit" | "metrics";

export const ALL_VIEWS: ViewName[] = [
  "contour",
  "quantiles",
  "surface3d",
  "kmsplit",
  "metrics",
];

export interface SessionState {
  datasetId: string | null;
  summary: DatasetSummary | null;
  spec: ModelSpec | null;
  jobId: string | null;
  jobState: JobState | null;
  jobError: string | null;
  overrides: OverrideState;
  activeView: ViewName;
}

export function newSession(): SessionState {
  return {
    datasetId: null,
    summary: null,
    spec: null,
    jobId: null,
    jobState: null,
    jobError: null,
    overrides: emptyOverrides(),
    activeView: "contour",
  };
}

/** Model-backed views unlock only once the fit job is done. */
export function viewEnabled(state: SessionState, view: ViewName): boolean {
  return state.jobState === "done";
}

export function describeJob(state: SessionState): string {
  if (!state.jobId) return "no model fitted yet";
  if (state.jobState === "failed") return `fit failed: ${state.jobError}`;
  return `job ${state.jobId}: ${state.jobState ?? "submitting"}`;
}
