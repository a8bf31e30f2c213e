/** Quantile-curve, median-split and metrics panels.  All three draw the
 * payload values directly; numbers in the DOM are payload fields. */

import type { KMSplit, MetricsReport, QuantileCurves } from "../types.js";

const CURVE_COLORS = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e"];

export interface QuantileView {
  root: HTMLElement;
  canvas: HTMLCanvasElement;
  legend: HTMLElement;
  toggleCi(show: boolean): void;
}

export function renderQuantileView(
  curves: QuantileCurves,
  width = 640,
  height = 320,
): QuantileView {
  const root = document.createElement("div");
  root.className = "quantile-view";
  const canvas = document.createElement("canvas");
  canvas.width = width;
  canvas.height = height;
  root.appendChild(canvas);
  const legend = document.createElement("div");
  legend.className = "legend";
  curves.levels.forEach((level, i) => {
    const item = document.createElement("span");
    item.dataset.level = String(level);
    item.dataset.predictorValue = String(curves.predictor_values[i]);
    item.textContent = `q${level}: ${curves.predictor_values[i]}`;
    item.style.color = CURVE_COLORS[i % CURVE_COLORS.length];
    legend.appendChild(item);
  });
  root.appendChild(legend);

  let showCi = Boolean(curves.lower && curves.upper);

  function xOf(t: number): number {
    const t0 = curves.time_grid[0];
    const t1 = curves.time_grid[curves.time_grid.length - 1] || 1;
    return ((t - t0) / (t1 - t0 || 1)) * width;
  }

  function yOf(v: number): number {
    return height * (1 - v); // probabilities on the fixed [0, 1] scale
  }

  function draw(): void {
    const ctx = canvas.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, width, height);
    curves.curves.forEach((curve, i) => {
      const color = CURVE_COLORS[i % CURVE_COLORS.length];
      if (showCi && curves.lower && curves.upper) {
        ctx.globalAlpha = 0.15;
        ctx.fillStyle = color;
        ctx.beginPath();
        curves.time_grid.forEach((t, k) => {
          const x = xOf(t);
          const y = yOf(curves.lower![i][k]);
          if (k === 0) ctx.moveTo(x, y);
          else ctx.lineTo(x, y);
        });
        for (let k = curves.time_grid.length - 1; k >= 0; k--) {
          ctx.lineTo(xOf(curves.time_grid[k]), yOf(curves.upper![i][k]));
        }
        ctx.closePath();
        ctx.fill();
        ctx.globalAlpha = 1.0;
      }
      ctx.strokeStyle = color;
      ctx.beginPath();
      curves.time_grid.forEach((t, k) => {
        const x = xOf(t);
        const y = yOf(curve[k]);
        if (k === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
      ctx.stroke();
    });
  }

  draw();
  return {
    root,
    canvas,
    legend,
    toggleCi(show: boolean) {
      showCi = show && Boolean(curves.lower);
      draw();
    },
  };
}

export function renderKmSplitView(
  split: KMSplit,
  width = 640,
  height = 320,
): HTMLElement {
  const root = document.createElement("div");
  root.className = "kmsplit-view";
  const heading = document.createElement("div");
  heading.dataset.threshold = String(split.threshold);
  heading.textContent = `median split at ${split.threshold}`;
  root.appendChild(heading);
  const canvas = document.createElement("canvas");
  canvas.width = width;
  canvas.height = height;
  root.appendChild(canvas);

  const tmax = Math.max(
    1,
    ...split.groups.flatMap((g) => (g.knots.length ? [g.knots[g.knots.length - 1]] : [])),
  );
  const ctx = canvas.getContext("2d");
  if (ctx) {
    split.groups.forEach((group, gi) => {
      ctx.strokeStyle = gi === 0 ? "#2166ac" : "#b2182b";
      ctx.beginPath();
      let x = 0;
      let y = height * (1 - 1); // S starts at 1
      ctx.moveTo(0, y);
      group.knots.forEach((t, k) => {
        const nx = (t / tmax) * width;
        ctx.lineTo(nx, y); // horizontal segment to the knot
        y = height * (1 - group.survival[k]);
        ctx.lineTo(nx, y); // drop at the knot (right-continuous step)
        x = nx;
      });
      ctx.lineTo(width, y);
      ctx.stroke();
      void x;
    });
  }
  const legend = document.createElement("div");
  split.groups.forEach((g) => {
    const span = document.createElement("span");
    span.dataset.label = g.label;
    span.dataset.n = String(g.n);
    span.textContent = `${g.label} (n=${g.n}) `;
    legend.appendChild(span);
  });
  root.appendChild(legend);
  return root;
}

export function renderMetricsView(metrics: MetricsReport): HTMLElement {
  const root = document.createElement("div");
  root.className = "metrics-view";
  const table = document.createElement("table");
  const rows: [string, string][] = [
    ["C-index", String(metrics.c_index)],
    ["comparable pairs", String(metrics.comparable_pairs)],
    [
      "integrated Brier score",
      metrics.integrated_brier === null ? "n/a" : String(metrics.integrated_brier),
    ],
    [
      "evaluation window",
      metrics.window ? `[${metrics.window[0]}, ${metrics.window[1]}]` : "n/a",
    ],
  ];
  for (const [label, value] of rows) {
    const tr = document.createElement("tr");
    const th = document.createElement("th");
    th.textContent = label;
    const td = document.createElement("td");
    td.textContent = value;
    tr.appendChild(th);
    tr.appendChild(td);
    table.appendChild(tr);
  }
  root.appendChild(table);
  return root;
}
