/** Thin client for the survcontour HTTP service.
 * The fetch implementation is injectable so contract tests can serve
 * golden payloads without a network. */

import type {
  ContourSurface,
  DatasetSummary,
  JobRecord,
  KMSplit,
  MetricsReport,
  ModelSpec,
  QuantileCurves,
  Surface3D,
  UploadResponse,
} from "./types.js";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export interface SurfaceQuery {
  n_pred?: number;
  n_time?: number;
  ci?: boolean;
  bins?: number;
  adjusters?: Record<string, number | string>;
  seed?: number;
}

function queryString(q: SurfaceQuery): string {
  const params = new URLSearchParams();
  if (q.n_pred !== undefined) params.set("n_pred", String(q.n_pred));
  if (q.n_time !== undefined) params.set("n_time", String(q.n_time));
  if (q.ci !== undefined) params.set("ci", String(q.ci));
  if (q.bins !== undefined) params.set("bins", String(q.bins));
  if (q.seed !== undefined) params.set("seed", String(q.seed));
  if (q.adjusters && Object.keys(q.adjusters).length > 0) {
    params.set("adjusters", JSON.stringify(q.adjusters));
  }
  const s = params.toString();
  return s ? `?${s}` : "";
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) =>
      globalThis.fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const text = await resp.text();
    if (!resp.ok) {
      let message = text;
      try {
        message = (JSON.parse(text) as { error?: string }).error ?? text;
      } catch {
        /* non-JSON error body */
      }
      throw new ServiceError(resp.status, message);
    }
    return JSON.parse(text) as T;
  }

  uploadDataset(file: Blob, roles: object): Promise<UploadResponse> {
    const form = new FormData();
    form.append("file", file, "data.csv");
    form.append("roles", JSON.stringify(roles));
    return this.request<UploadResponse>("/datasets", {
      method: "POST",
      body: form,
    });
  }

  datasetSummary(datasetId: string): Promise<DatasetSummary> {
    return this.request<DatasetSummary>(`/datasets/${datasetId}/summary`);
  }

  submitModel(datasetId: string, spec: ModelSpec): Promise<{ job_id: string }> {
    return this.request<{ job_id: string }>("/models", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ dataset_id: datasetId, spec }),
    });
  }

  job(jobId: string): Promise<JobRecord> {
    return this.request<JobRecord>(`/jobs/${jobId}`);
  }

  contour(jobId: string, q: SurfaceQuery = {}): Promise<ContourSurface> {
    return this.request<ContourSurface>(
      `/models/${jobId}/contour${queryString(q)}`,
    );
  }

  surface3d(jobId: string, q: SurfaceQuery = {}): Promise<Surface3D> {
    return this.request<Surface3D>(
      `/models/${jobId}/surface3d${queryString(q)}`,
    );
  }

  quantileCurves(
    jobId: string,
    q: SurfaceQuery & { stratum?: string } = {},
  ): Promise<QuantileCurves> {
    const base = queryString(q);
    const extra = q.stratum
      ? (base ? "&" : "?") + "stratum=" + encodeURIComponent(q.stratum)
      : "";
    return this.request<QuantileCurves>(
      `/models/${jobId}/quantile-curves${base}${extra}`,
    );
  }

  metrics(jobId: string): Promise<MetricsReport> {
    return this.request<MetricsReport>(`/models/${jobId}/metrics`);
  }

  kmSplit(jobId: string): Promise<KMSplit> {
    return this.request<KMSplit>(`/models/${jobId}/km-split`);
  }
}

/** Poll a job until it leaves the queued/running states. */
export async function pollJob(
  api: ApiClient,
  jobId: string,
  intervalMs = 1000,
  maxAttempts = 600,
): Promise<JobRecord> {
  for (let attempt = 0; attempt < maxAttempts; attempt++) {
    const record = await api.job(jobId);
    if (record.state === "done" || record.state === "failed") return record;
    await new Promise((resolve) => setTimeout(resolve, intervalMs));
  }
  throw new Error(`job ${jobId} did not finish after ${maxAttempts} polls`);
}
