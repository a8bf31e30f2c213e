/** Application shell: upload form, guided model wizard, job submission
 * with 1 s polling, adjuster panel, and the five payload views. */

import { ApiClient, pollJob, ServiceError } from "./api.js";
import {
  AdjusterField,
  buildFields,
  resetOverrides,
  setOverride,
} from "./adjusters.js";
import { ALL_VIEWS, newSession, SessionState, ViewName, viewEnabled } from "./session.js";
import type { ColumnRoles, Family, ModelSpec } from "./types.js";
import { renderContourView } from "./views/contour.js";
import { renderKmSplitView, renderMetricsView, renderQuantileView } from "./views/panels.js";
import { renderSurface3DView } from "./views/surface3d.js";
import { QUESTIONS, UNSUPPORTED_BRANCHES, Wizard } from "./wizard.js";

const FAMILY_LABELS: Record<Family, string> = {
  kaplan_meier: "product-limit curve (no covariates)",
  cox: "proportional hazards",
  stratified_cox: "stratified proportional hazards",
  parametric: "parametric (AFT)",
  fine_gray: "competing-risks cumulative incidence",
  rsf: "random survival forest",
};

export class App {
  readonly state: SessionState = newSession();
  readonly wizard = new Wizard();
  private viewContainer: HTMLElement | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
    private readonly pollIntervalMs = 1000,
  ) {}

  mount(): void {
    this.root.innerHTML = "";
    this.root.appendChild(this.uploadSection());
    this.root.appendChild(this.wizardSection());
    this.root.appendChild(this.statusSection());
    const tabs = this.viewTabs();
    this.root.appendChild(tabs);
    this.viewContainer = document.createElement("div");
    this.viewContainer.className = "view-container";
    this.root.appendChild(this.viewContainer);
  }

  private uploadSection(): HTMLElement {
    const section = document.createElement("section");
    section.className = "upload";
    const file = document.createElement("input");
    file.type = "file";
    file.accept = ".csv";
    const rolesBox = document.createElement("textarea");
    rolesBox.placeholder =
      '{"time_column": "time", "status_column": "status", "predictor": "x", ' +
      '"adjusters": [], "strata": null, "cause_of_interest": 1}';
    const button = document.createElement("button");
    button.type = "button";
    button.textContent = "upload";
    const note = document.createElement("div");
    note.className = "upload-note";
    button.addEventListener("click", async () => {
      const blob = file.files?.[0];
      if (!blob) {
        note.textContent = "choose a CSV file first";
        return;
      }
      try {
        const roles = JSON.parse(rolesBox.value) as ColumnRoles;
        const upload = await this.api.uploadDataset(blob, roles);
        this.state.datasetId = upload.dataset_id;
        this.state.summary = await this.api.datasetSummary(upload.dataset_id);
        note.textContent =
          `dataset ${upload.dataset_id}: kept ` +
          `${upload.report.rows_kept}/${upload.report.rows_in} rows`;
      } catch (err) {
        note.textContent = err instanceof Error ? err.message : String(err);
      }
    });
    section.append(file, rolesBox, button, note);
    return section;
  }

  private wizardSection(): HTMLElement {
    const section = document.createElement("section");
    section.className = "wizard";
    const prompt = document.createElement("div");
    prompt.className = "wizard-prompt";
    const explanation = document.createElement("div");
    explanation.className = "wizard-explanation";
    const yes = document.createElement("button");
    yes.textContent = "yes";
    const no = document.createElement("button");
    no.textContent = "no";
    const back = document.createElement("button");
    back.textContent = "back";
    const outcome = document.createElement("div");
    outcome.className = "wizard-outcome";
    const unsupported = document.createElement("ul");
    unsupported.className = "unsupported-branches";
    for (const branch of UNSUPPORTED_BRANCHES) {
      const li = document.createElement("li");
      li.className = "greyed";
      li.textContent = `${branch.label} — ${branch.reason}`;
      unsupported.appendChild(li);
    }

    const refresh = () => {
      if (this.wizard.done) {
        prompt.textContent = "";
        const result = this.wizard.outcome();
        outcome.dataset.family = result.family ?? "";
        outcome.textContent = result.family
          ? `suggested: ${FAMILY_LABELS[result.family]} (${result.note})`
          : result.note;
      } else {
        const q = this.wizard.current;
        prompt.textContent = q.prompt;
        explanation.textContent = q.explanation;
        outcome.textContent = "";
      }
    };
    yes.addEventListener("click", () => {
      if (!this.wizard.done) this.wizard.answer(true);
      refresh();
    });
    no.addEventListener("click", () => {
      if (!this.wizard.done) this.wizard.answer(false);
      refresh();
    });
    back.addEventListener("click", () => {
      this.wizard.back();
      refresh();
    });
    refresh();
    section.append(prompt, explanation, yes, no, back, outcome, unsupported);
    return section;
  }

  private statusSection(): HTMLElement {
    const section = document.createElement("section");
    section.className = "job-status";
    section.textContent = "no model fitted yet";
    return section;
  }

  private viewTabs(): HTMLElement {
    const tabs = document.createElement("nav");
    tabs.className = "view-tabs";
    for (const view of ALL_VIEWS) {
      const button = document.createElement("button");
      button.type = "button";
      button.dataset.view = view;
      button.textContent = view;
      button.disabled = !viewEnabled(this.state, view);
      button.addEventListener("click", () => void this.showView(view));
      tabs.appendChild(button);
    }
    return tabs;
  }

  private refreshTabs(): void {
    this.root.querySelectorAll<HTMLButtonElement>(".view-tabs button").forEach(
      (b) => {
        b.disabled = !viewEnabled(this.state, b.dataset.view as ViewName);
      },
    );
    const status = this.root.querySelector(".job-status");
    if (status) {
      status.textContent = this.state.jobId
        ? `job ${this.state.jobId}: ${this.state.jobState}` +
          (this.state.jobError ? ` (${this.state.jobError})` : "")
        : "no model fitted yet";
    }
  }

  /** Submit the wizard's spec for the uploaded dataset and poll. */
  async fitModel(spec: ModelSpec): Promise<void> {
    if (!this.state.datasetId) throw new Error("upload a dataset first");
    this.state.spec = spec;
    const { job_id } = await this.api.submitModel(this.state.datasetId, spec);
    this.state.jobId = job_id;
    this.state.jobState = "queued";
    this.refreshTabs();
    const record = await pollJob(this.api, job_id, this.pollIntervalMs);
    this.state.jobState = record.state;
    this.state.jobError = record.error;
    this.refreshTabs();
    if (record.state === "failed") {
      throw new ServiceError(409, record.error ?? "fit failed");
    }
  }

  adjusterFields(): AdjusterField[] {
    if (!this.state.summary || !this.state.spec) return [];
    const defaults: Record<string, { value: number | string; source: "default" }> =
      {};
    for (const name of this.state.spec.roles.adjusters) {
      const column = this.state.summary.columns[name];
      if (!column) continue;
      defaults[name] =
        column.kind === "continuous"
          ? { value: column.median, source: "default" }
          : {
              value: column.levels[indexOfMax(column.counts)],
              source: "default",
            };
    }
    return buildFields(defaults, this.state.summary);
  }

  overrideAdjuster(field: AdjusterField, raw: string): void {
    this.state.overrides = setOverride(this.state.overrides, field, raw);
  }

  resetAdjusters(): void {
    this.state.overrides = resetOverrides();
  }

  async showView(view: ViewName): Promise<void> {
    if (!viewEnabled(this.state, view) || !this.state.jobId) return;
    this.state.activeView = view;
    const jobId = this.state.jobId;
    const overrides = this.state.overrides.overrides;
    const query = Object.keys(overrides).length ? { adjusters: overrides } : {};
    let element: HTMLElement;
    switch (view) {
      case "contour": {
        const surface = await this.api.contour(jobId, query);
        element = renderContourView(surface).root;
        break;
      }
      case "quantiles": {
        const curves = await this.api.quantileCurves(jobId, query);
        element = renderQuantileView(curves).root;
        break;
      }
      case "surface3d": {
        const payload = await this.api.surface3d(jobId, query);
        element = renderSurface3DView(payload).root;
        break;
      }
      case "kmsplit": {
        element = renderKmSplitView(await this.api.kmSplit(jobId));
        break;
      }
      case "metrics": {
        element = renderMetricsView(await this.api.metrics(jobId));
        break;
      }
    }
    if (this.viewContainer) {
      this.viewContainer.innerHTML = "";
      this.viewContainer.appendChild(element);
    }
  }
}

function indexOfMax(values: number[]): number {
  let best = 0;
  for (let i = 1; i < values.length; i++) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

export function questionCount(): number {
  return QUESTIONS.length;
}

/** Browser entry point. */
export function start(rootId = "app", baseUrl = ""): App {
  const rootElement = document.getElementById(rootId);
  if (!rootElement) throw new Error(`missing #${rootId}`);
  const app = new App(new ApiClient(baseUrl), rootElement);
  app.mount();
  return app;
}
