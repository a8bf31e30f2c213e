/** 2D contour view: heatmap canvas, predictor histogram at the right,
 * nearest-cell hover readout, CI band toggle and per-stratum tabs.
 *
 * Every number shown comes straight from the payload: the hover readout
 * exposes the exact grid-cell probability through data attributes. */

import {
  cellAtPixel,
  panelLabels,
  panelSurface,
  probabilityColor,
} from "../grid.js";
import type { ContourSurface } from "../types.js";

export interface ContourView {
  root: HTMLElement;
  readout: HTMLElement;
  canvas: HTMLCanvasElement;
  /** switch the visible stratum panel (no-op for plain surfaces) */
  selectPanel(stratum: string | null): void;
  /** show or hide CI bands in the readout and shading */
  toggleCi(show: boolean): void;
  activeSurface(): ContourSurface;
}

export function renderContourView(
  surface: ContourSurface,
  width = 640,
  height = 420,
): ContourView {
  const root = document.createElement("div");
  root.className = "contour-view";

  const tabs = document.createElement("div");
  tabs.className = "panel-tabs";
  root.appendChild(tabs);

  const row = document.createElement("div");
  row.className = "contour-row";
  root.appendChild(row);

  const canvas = document.createElement("canvas");
  canvas.width = width;
  canvas.height = height;
  canvas.className = "contour-canvas";
  row.appendChild(canvas);

  const hist = document.createElement("canvas");
  hist.width = 140;
  hist.height = height;
  hist.className = "contour-histogram";
  row.appendChild(hist);

  const readout = document.createElement("div");
  readout.className = "hover-readout";
  readout.textContent = "hover for values";
  root.appendChild(readout);

  let active: string | null = null;
  let showCi = Boolean(surface.lower && surface.upper);

  const labels = panelLabels(surface);
  if (labels.length > 0) {
    active = labels[0];
    for (const label of labels) {
      const button = document.createElement("button");
      button.type = "button";
      button.textContent = label;
      button.dataset.stratum = label;
      button.addEventListener("click", () => view.selectPanel(label));
      tabs.appendChild(button);
    }
  }

  function current(): ContourSurface {
    return panelSurface(surface, active);
  }

  function draw(): void {
    const s = current();
    const ctx = canvas.getContext("2d");
    if (ctx) {
      const nCols = s.time_grid.length;
      const nRows = s.predictor_grid.length;
      const cw = width / nCols;
      const ch = height / nRows;
      for (let r = 0; r < nRows; r++) {
        for (let c = 0; c < nCols; c++) {
          ctx.fillStyle = probabilityColor(s.prob[r][c]);
          ctx.fillRect(
            c * cw,
            height - (r + 1) * ch,
            Math.ceil(cw),
            Math.ceil(ch),
          );
        }
      }
    }
    const hctx = hist.getContext("2d");
    if (hctx) {
      hctx.clearRect(0, 0, hist.width, hist.height);
      const counts = s.histogram.counts;
      const max = Math.max(1, ...counts);
      const bh = hist.height / counts.length;
      hctx.fillStyle = "#e67e22"; // the side histogram is orange
      counts.forEach((count, i) => {
        const w = (count / max) * (hist.width - 4);
        hctx.fillRect(0, hist.height - (i + 1) * bh, w, Math.max(1, bh - 1));
      });
    }
  }

  canvas.addEventListener("mousemove", (event: MouseEvent) => {
    const rect = canvas.getBoundingClientRect();
    const px = event.clientX - rect.left;
    const py = event.clientY - rect.top;
    const s = current();
    const hit = cellAtPixel(s, px, py, width, height);
    readout.dataset.row = String(hit.row);
    readout.dataset.col = String(hit.col);
    readout.dataset.value = String(hit.value);
    let text =
      `t=${hit.time}  predictor=${hit.predictor}  ` +
      `${s.outcome_kind}=${hit.value}`;
    if (showCi && hit.lower !== undefined && hit.upper !== undefined) {
      readout.dataset.lower = String(hit.lower);
      readout.dataset.upper = String(hit.upper);
      text += `  band=[${hit.lower}, ${hit.upper}]`;
    } else {
      delete readout.dataset.lower;
      delete readout.dataset.upper;
    }
    readout.textContent = text;
  });

  const view: ContourView = {
    root,
    readout,
    canvas,
    selectPanel(stratum) {
      if (stratum !== null && !labels.includes(stratum)) {
        throw new Error(`unknown stratum ${stratum}`);
      }
      active = stratum;
      tabs.querySelectorAll("button").forEach((b) => {
        b.classList.toggle("active", b.dataset.stratum === stratum);
      });
      draw();
    },
    toggleCi(show) {
      showCi = show && Boolean(current().lower);
      draw();
    },
    activeSurface: current,
  };
  draw();
  return view;
}
