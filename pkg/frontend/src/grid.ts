/** Grid lookups and the fixed [0,1] color scale for contour rendering.
 * Hover readouts use nearest-cell lookup, never interpolation, so every
 * displayed number is a payload value. */

import type { ContourSurface } from "./types.js";

export interface CellHit {
  row: number;
  col: number;
  time: number;
  predictor: number;
  value: number;
  lower?: number;
  upper?: number;
}

/** Index of the grid point nearest to x (ties resolve to the lower index). */
export function nearestIndex(grid: number[], x: number): number {
  if (grid.length === 0) throw new Error("empty grid");
  let best = 0;
  let bestDist = Math.abs(x - grid[0]);
  for (let i = 1; i < grid.length; i++) {
    const d = Math.abs(x - grid[i]);
    if (d < bestDist) {
      best = i;
      bestDist = d;
    }
  }
  return best;
}

/** Nearest grid cell for a (time, predictor) query point. */
export function nearestCell(
  surface: ContourSurface,
  time: number,
  predictor: number,
): CellHit {
  const col = nearestIndex(surface.time_grid, time);
  const row = nearestIndex(surface.predictor_grid, predictor);
  const hit: CellHit = {
    row,
    col,
    time: surface.time_grid[col],
    predictor: surface.predictor_grid[row],
    value: surface.prob[row][col],
  };
  if (surface.lower && surface.upper) {
    hit.lower = surface.lower[row][col];
    hit.upper = surface.upper[row][col];
  }
  return hit;
}

/** Map canvas pixel coordinates to the cell drawn there.  Columns span
 * the width evenly; rows run bottom-up (low predictor at the bottom). */
export function cellAtPixel(
  surface: ContourSurface,
  px: number,
  py: number,
  width: number,
  height: number,
): CellHit {
  const nCols = surface.time_grid.length;
  const nRows = surface.predictor_grid.length;
  const col = clampIndex(Math.floor((px / width) * nCols), nCols);
  const rowFromTop = clampIndex(Math.floor((py / height) * nRows), nRows);
  const row = nRows - 1 - rowFromTop;
  const hit: CellHit = {
    row,
    col,
    time: surface.time_grid[col],
    predictor: surface.predictor_grid[row],
    value: surface.prob[row][col],
  };
  if (surface.lower && surface.upper) {
    hit.lower = surface.lower[row][col];
    hit.upper = surface.upper[row][col];
  }
  return hit;
}

function clampIndex(i: number, n: number): number {
  return Math.max(0, Math.min(n - 1, i));
}

/** Sequential colormap over the fixed [0, 1] probability domain (a
 * compact viridis-like ramp; perceptually ordered dark -> light). */
export function probabilityColor(p: number): string {
  const v = Math.max(0, Math.min(1, p));
  const stops: [number, [number, number, number]][] = [
    [0.0, [68, 1, 84]],
    [0.25, [59, 82, 139]],
    [0.5, [33, 145, 140]],
    [0.75, [94, 201, 98]],
    [1.0, [253, 231, 37]],
  ];
  for (let i = 1; i < stops.length; i++) {
    if (v <= stops[i][0]) {
      const [x0, c0] = stops[i - 1];
      const [x1, c1] = stops[i];
      const f = x1 === x0 ? 0 : (v - x0) / (x1 - x0);
      const mix = c0.map((a, k) => Math.round(a + f * (c1[k] - a)));
      return `rgb(${mix[0]},${mix[1]},${mix[2]})`;
    }
  }
  return "rgb(253,231,37)";
}

/** The surface to draw for a given panel selection (panels carry whole
 * child surfaces; a plain surface renders itself). */
export function panelSurface(
  surface: ContourSurface,
  stratum: string | null,
): ContourSurface {
  if (!surface.panels || stratum === null) return surface;
  const panel = surface.panels.find((p) => p.stratum === stratum);
  if (!panel) throw new Error(`unknown stratum ${stratum}`);
  return panel.surface;
}

export function panelLabels(surface: ContourSurface): string[] {
  return surface.panels ? surface.panels.map((p) => p.stratum) : [];
}
