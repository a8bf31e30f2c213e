import { describe, expect, it } from "vitest";

import { DEFAULT_CAMERA } from "../src/scene3d.js";
import { renderSurface3DView } from "../src/views/surface3d.js";
import { goldenSurface3D } from "./helpers.js";

describe("3D surface view", () => {
  it("CI toggle leaves the point-surface values unchanged", () => {
    const payload = goldenSurface3D();
    const view = renderSurface3DView(payload);
    document.body.appendChild(view.root);
    expect(view.ciShown()).toBe(true);
    const before = JSON.stringify(view.pointValues());
    view.toggleCi(false);
    expect(view.ciShown()).toBe(false);
    expect(JSON.stringify(view.pointValues())).toBe(before);
    view.toggleCi(true);
    expect(JSON.stringify(view.pointValues())).toBe(before);
    expect(view.pointValues()).toEqual(payload.z);
  });

  it("drag rotates the camera and reset returns the default pose", () => {
    const view = renderSurface3DView(goldenSurface3D());
    document.body.appendChild(view.root);
    view.canvas.dispatchEvent(
      new MouseEvent("mousedown", { clientX: 10, clientY: 10, bubbles: true }),
    );
    view.canvas.dispatchEvent(
      new MouseEvent("mousemove", { clientX: 80, clientY: 30, bubbles: true }),
    );
    view.canvas.dispatchEvent(new MouseEvent("mouseup", { bubbles: true }));
    expect(view.camera()).not.toEqual(DEFAULT_CAMERA);
    view.reset();
    expect(view.camera()).toEqual(DEFAULT_CAMERA);
  });

  it("hover z values equal the payload", () => {
    const payload = goldenSurface3D();
    const view = renderSurface3DView(payload);
    for (const [r, c] of [
      [0, 0],
      [3, 7],
      [payload.predictor_grid.length - 1, payload.time_grid.length - 1],
    ]) {
      const value = view.valueAt(
        payload.time_grid[c],
        payload.predictor_grid[r],
      );
      expect(value).toBe(payload.z[r][c]);
      expect(view.readout.dataset.value).toBe(String(payload.z[r][c]));
    }
  });

  it("disables the CI checkbox when the payload has no layers", () => {
    const payload = goldenSurface3D();
    delete payload.ci_layers;
    const view = renderSurface3DView(payload);
    expect(view.ciShown()).toBe(false);
    view.toggleCi(true); // cannot enable what the payload lacks
    expect(view.ciShown()).toBe(false);
  });
});
