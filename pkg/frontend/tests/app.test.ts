/** End-to-end UI flow against the mocked service: upload, wizard, fit
 * with polling, view gating, adjuster overrides and the refetch query. */
import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, pollJob, ServiceError } from "../src/api.js";
import { App } from "../src/app.js";
import { viewEnabled } from "../src/session.js";
import {
  goldenContour,
  goldenMetrics,
  goldenSummary,
  mockService,
} from "./helpers.js";
import type { ColumnRoles, ModelSpec } from "../src/types.js";

const ROLES: ColumnRoles = {
  time_column: "time",
  status_column: "status",
  predictor: "x",
  adjusters: ["age"],
  strata: null,
  cause_of_interest: 1,
};

const SPEC: ModelSpec = { family: "cox", roles: ROLES, options: {} };

function makeApp(service = mockService()) {
  const api = new ApiClient("", service.fetch);
  const root = document.createElement("div");
  document.body.appendChild(root);
  const app = new App(api, root, 0); // poll without waiting in tests
  app.mount();
  return { app, api, service, root };
}

describe("api client", () => {
  it("uploads, submits, polls to done and fetches payloads", async () => {
    const service = mockService();
    const api = new ApiClient("", service.fetch);
    const upload = await api.uploadDataset(new Blob(["time,status,x\n"]), ROLES);
    expect(upload.dataset_id).toBe("ds1");
    expect(upload.report.rows_kept).toBe(90);
    const summary = await api.datasetSummary("ds1");
    expect(summary).toEqual(goldenSummary());
    const { job_id } = await api.submitModel("ds1", SPEC);
    const record = await pollJob(api, job_id, 0);
    expect(record.state).toBe("done");
    const contour = await api.contour(job_id);
    expect(contour).toEqual(goldenContour());
    const metrics = await api.metrics(job_id);
    expect(metrics).toEqual(goldenMetrics());
  });

  it("maps error payloads to ServiceError with the status code", async () => {
    const service = mockService();
    const api = new ApiClient("", service.fetch);
    await expect(api.job("missing")).rejects.toMatchObject({
      status: 404,
    });
    await expect(api.job("missing")).rejects.toBeInstanceOf(ServiceError);
  });
});

describe("app session flow", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("disables model views until the job is done, then enables them", async () => {
    const { app, service } = makeApp();
    expect(viewEnabled(app.state, "contour")).toBe(false);
    const buttonsBefore = Array.from(
      document.querySelectorAll<HTMLButtonElement>(".view-tabs button"),
    );
    expect(buttonsBefore.every((b) => b.disabled)).toBe(true);

    app.state.datasetId = "ds1";
    app.state.summary = goldenSummary();
    await app.fitModel(SPEC);
    expect(app.state.jobState).toBe("done");
    expect(viewEnabled(app.state, "surface3d")).toBe(true);
    const buttonsAfter = Array.from(
      document.querySelectorAll<HTMLButtonElement>(".view-tabs button"),
    );
    expect(buttonsAfter.every((b) => !b.disabled)).toBe(true);
    // polling hit /jobs at least twice (running, then done)
    const polls = service.requests.filter((r) => r.url.startsWith("/jobs/"));
    expect(polls.length).toBeGreaterThanOrEqual(2);
  });

  it("renders the contour view from the fetched payload", async () => {
    const { app, root } = makeApp();
    app.state.datasetId = "ds1";
    app.state.summary = goldenSummary();
    await app.fitModel(SPEC);
    await app.showView("contour");
    const readout = root.querySelector(".hover-readout");
    expect(readout).not.toBeNull();
    const canvas = root.querySelector<HTMLCanvasElement>(".contour-canvas");
    expect(canvas).not.toBeNull();
  });

  it("sends adjuster overrides on refetch and none after reset", async () => {
    const { app, service } = makeApp();
    app.state.datasetId = "ds1";
    app.state.summary = goldenSummary();
    await app.fitModel(SPEC);
    const [age] = app.adjusterFields();
    expect(age.name).toBe("age");
    app.overrideAdjuster(age, "72");
    await app.showView("contour");
    let urls = service.requests.filter((r) =>
      r.url.startsWith("/models/job1/contour"),
    );
    expect(urls[urls.length - 1].url).toContain(
      "adjusters=" + encodeURIComponent(JSON.stringify({ age: 72 })),
    );
    app.resetAdjusters();
    await app.showView("contour");
    urls = service.requests.filter((r) =>
      r.url.startsWith("/models/job1/contour"),
    );
    // reset means no adjusters parameter at all: the default-profile
    // payload is requested exactly as on first load
    expect(urls[urls.length - 1].url).toBe("/models/job1/contour");
  });

  it("surfaces failed jobs through the status line", async () => {
    const service = mockService();
    const failingFetch: typeof service.fetch = async (url, init) => {
      if (url.startsWith("/jobs/")) {
        return new Response(
          JSON.stringify({
            id: "job1",
            state: "failed",
            dataset_id: "ds1",
            spec: null,
            created: 0,
            finished: 1,
            error: "nonconvergence: possible monotone likelihood",
          }),
          { status: 200 },
        );
      }
      return service.fetch(url, init);
    };
    const { app, root } = makeApp({ fetch: failingFetch, requests: [] });
    app.state.datasetId = "ds1";
    app.state.summary = goldenSummary();
    await expect(app.fitModel(SPEC)).rejects.toThrow(/monotone/);
    expect(app.state.jobState).toBe("failed");
    expect(viewEnabled(app.state, "contour")).toBe(false);
    expect(root.querySelector(".job-status")!.textContent).toContain(
      "monotone",
    );
  });

  it("wizard section walks to a family and lists greyed branches", () => {
    const { app, root } = makeApp();
    const buttons = root.querySelectorAll<HTMLButtonElement>(".wizard button");
    const yes = buttons[0];
    const no = buttons[1];
    no.click(); // interval censored? no
    yes.click(); // competing risks? yes
    const outcome = root.querySelector<HTMLElement>(".wizard-outcome")!;
    expect(outcome.dataset.family).toBe("fine_gray");
    expect(
      root.querySelectorAll(".unsupported-branches .greyed").length,
    ).toBe(3);
    void app;
  });
});
