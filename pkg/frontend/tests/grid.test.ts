import { describe, expect, it } from "vitest";

import {
  cellAtPixel,
  nearestCell,
  nearestIndex,
  panelLabels,
  panelSurface,
  probabilityColor,
} from "../src/grid.js";
import { goldenContour } from "./helpers.js";
import type { ContourSurface } from "../src/types.js";

describe("nearestIndex", () => {
  it("picks the closest grid point, ties to the lower index", () => {
    const grid = [0, 1, 2, 4];
    expect(nearestIndex(grid, -5)).toBe(0);
    expect(nearestIndex(grid, 0.49)).toBe(0);
    expect(nearestIndex(grid, 0.5)).toBe(0); // equidistant: lower wins
    expect(nearestIndex(grid, 0.51)).toBe(1);
    expect(nearestIndex(grid, 3.1)).toBe(3);
    expect(nearestIndex(grid, 99)).toBe(3);
  });
});

describe("nearestCell", () => {
  const surface = goldenContour();

  it("returns the exact payload value, never an interpolation", () => {
    for (let r = 0; r < surface.predictor_grid.length; r += 5) {
      for (let c = 0; c < surface.time_grid.length; c += 7) {
        const hit = nearestCell(
          surface,
          surface.time_grid[c] + 1e-9,
          surface.predictor_grid[r] - 1e-9,
        );
        expect(hit.row).toBe(r);
        expect(hit.col).toBe(c);
        expect(hit.value).toBe(surface.prob[r][c]);
      }
    }
  });

  it("carries the CI band values when present", () => {
    const hit = nearestCell(surface, surface.time_grid[3], surface.predictor_grid[2]);
    expect(hit.lower).toBe(surface.lower![2][3]);
    expect(hit.upper).toBe(surface.upper![2][3]);
  });
});

describe("cellAtPixel", () => {
  const surface = goldenContour();
  const width = 640;
  const height = 420;

  it("maps pixel centers to their cells with rows bottom-up", () => {
    const nCols = surface.time_grid.length;
    const nRows = surface.predictor_grid.length;
    const r = 3;
    const c = 5;
    const px = ((c + 0.5) / nCols) * width;
    const py = height - ((r + 0.5) / nRows) * height;
    const hit = cellAtPixel(surface, px, py, width, height);
    expect(hit.row).toBe(r);
    expect(hit.col).toBe(c);
    expect(hit.value).toBe(surface.prob[r][c]);
  });

  it("clamps pixels outside the canvas to edge cells", () => {
    const hit = cellAtPixel(surface, -10, 10_000, width, height);
    expect(hit.col).toBe(0);
    expect(hit.row).toBe(0);
  });
});

describe("probabilityColor", () => {
  it("is defined on the fixed [0,1] domain and clamps outside it", () => {
    expect(probabilityColor(0)).toBe("rgb(68,1,84)");
    expect(probabilityColor(1)).toBe("rgb(253,231,37)");
    expect(probabilityColor(-5)).toBe(probabilityColor(0));
    expect(probabilityColor(7)).toBe(probabilityColor(1));
  });
});

describe("panelSurface", () => {
  it("returns the child surface for a stratum and itself otherwise", () => {
    const plain = goldenContour();
    expect(panelSurface(plain, null)).toBe(plain);
    const paneled: ContourSurface = {
      ...plain,
      panels: [
        { stratum: "a", surface: plain },
        { stratum: "b", surface: { ...plain, prob: plain.prob.slice(0, 2) } },
      ],
    };
    expect(panelLabels(paneled)).toEqual(["a", "b"]);
    expect(panelSurface(paneled, "b").prob.length).toBe(2);
    expect(() => panelSurface(paneled, "zzz")).toThrow(/unknown stratum/);
  });
});
