/** Golden payloads (emitted by the backend library) and a mocked service
 * that serves them, so contract tests exercise the real schemas without a
 * network. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import type { FetchLike } from "../src/api.js";
import type {
  ContourSurface,
  DatasetSummary,
  KMSplit,
  MetricsReport,
  QuantileCurves,
  Surface3D,
} from "../src/types.js";

const goldenDir = join(dirname(fileURLToPath(import.meta.url)), "golden");

function load<T>(name: string): T {
  return JSON.parse(readFileSync(join(goldenDir, name), "utf-8")) as T;
}

export const goldenContour = (): ContourSurface => load("contour.json");
export const goldenSurface3D = (): Surface3D => load("surface3d.json");
export const goldenQuantiles = (): QuantileCurves => load("quantiles.json");
export const goldenMetrics = (): MetricsReport => load("metrics.json");
export const goldenKmSplit = (): KMSplit => load("kmsplit.json");
export const goldenSummary = (): DatasetSummary => load("summary.json");

export interface MockService {
  fetch: FetchLike;
  requests: { url: string; method: string; body?: unknown }[];
}

/** Serves the golden payloads for one dataset/job pair and records every
 * request so tests can assert the query strings sent by the UI. */
export function mockService(
  overrides: Partial<Record<string, unknown>> = {},
): MockService {
  const requests: MockService["requests"] = [];
  let polls = 0;

  const fetchImpl: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    let body: unknown;
    if (typeof init?.body === "string") {
      try {
        body = JSON.parse(init.body);
      } catch {
        body = init.body;
      }
    }
    requests.push({ url, method, body });

    const respond = (payload: unknown, status = 200) =>
      new Response(JSON.stringify(payload), {
        status,
        headers: { "content-type": "application/json" },
      });

    if (url.startsWith("/datasets") && method === "POST") {
      return respond(
        {
          dataset_id: "ds1",
          report: { rows_in: 90, rows_kept: 90, drops: [] },
        },
        201,
      );
    }
    if (url.startsWith("/datasets/ds1/summary")) {
      return respond(goldenSummary());
    }
    if (url === "/models" && method === "POST") {
      return respond({ job_id: "job1" }, 202);
    }
    if (url.startsWith("/jobs/job1")) {
      polls += 1;
      const state = polls >= 2 ? "done" : "running";
      return respond({
        id: "job1",
        state,
        dataset_id: "ds1",
        spec: body ?? null,
        created: 0,
        finished: state === "done" ? 1 : null,
        error: null,
      });
    }
    if (url.startsWith("/models/job1/contour")) {
      return respond(overrides.contour ?? goldenContour());
    }
    if (url.startsWith("/models/job1/surface3d")) {
      return respond(overrides.surface3d ?? goldenSurface3D());
    }
    if (url.startsWith("/models/job1/quantile-curves")) {
      return respond(goldenQuantiles());
    }
    if (url.startsWith("/models/job1/metrics")) {
      return respond(goldenMetrics());
    }
    if (url.startsWith("/models/job1/km-split")) {
      return respond(goldenKmSplit());
    }
    return respond({ error: `unknown id ${url}` }, 404);
  };

  return { fetch: fetchImpl, requests };
}
