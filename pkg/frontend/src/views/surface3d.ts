/** Rotatable 3D surface on a plain canvas: drag to orbit, reset returns
 * to the default pose, CI layers render semi-transparent and toggling
 * them never touches the point-surface values. */

import {
  buildMesh,
  Camera,
  DEFAULT_CAMERA,
  resetCamera,
  rotateCamera,
} from "../scene3d.js";
import { nearestIndex, probabilityColor } from "../grid.js";
import type { Surface3D } from "../types.js";

export interface Surface3DView {
  root: HTMLElement;
  canvas: HTMLCanvasElement;
  readout: HTMLElement;
  camera(): Camera;
  toggleCi(show: boolean): void;
  ciShown(): boolean;
  reset(): void;
  /** payload z values currently driving the point surface */
  pointValues(): number[][];
  /** hover value lookup used by the readout (payload z, no recompute) */
  valueAt(time: number, predictor: number): number;
}

export function renderSurface3DView(
  surface: Surface3D,
  width = 520,
  height = 420,
): Surface3DView {
  const root = document.createElement("div");
  root.className = "surface3d-view";

  const canvas = document.createElement("canvas");
  canvas.width = width;
  canvas.height = height;
  root.appendChild(canvas);

  const controls = document.createElement("div");
  const resetButton = document.createElement("button");
  resetButton.type = "button";
  resetButton.textContent = "reset view";
  controls.appendChild(resetButton);
  const ciToggle = document.createElement("input");
  ciToggle.type = "checkbox";
  ciToggle.checked = Boolean(surface.ci_layers);
  ciToggle.disabled = !surface.ci_layers;
  controls.appendChild(ciToggle);
  root.appendChild(controls);

  const readout = document.createElement("div");
  readout.className = "hover-readout";
  root.appendChild(readout);

  let camera: Camera = { ...DEFAULT_CAMERA };
  let showCi = Boolean(surface.ci_layers);
  let dragging = false;
  let lastX = 0;
  let lastY = 0;

  function draw(): void {
    const mesh = buildMesh(surface, camera, width, height, showCi);
    const ctx = canvas.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, width, height);
    for (const quad of mesh.quads) {
      ctx.beginPath();
      quad.corners.forEach(([x, y], i) => {
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
      ctx.closePath();
      if (quad.layer === "point") {
        ctx.globalAlpha = 1.0;
        ctx.fillStyle = probabilityColor(quad.value);
      } else {
        ctx.globalAlpha = 0.25; // CI layers are semi-transparent
        ctx.fillStyle = quad.layer === "lower" ? "#4575b4" : "#d73027";
      }
      ctx.fill();
    }
    ctx.globalAlpha = 1.0;
  }

  canvas.addEventListener("mousedown", (e: MouseEvent) => {
    dragging = true;
    lastX = e.clientX;
    lastY = e.clientY;
  });
  canvas.addEventListener("mousemove", (e: MouseEvent) => {
    if (!dragging) return;
    camera = rotateCamera(camera, e.clientX - lastX, e.clientY - lastY);
    lastX = e.clientX;
    lastY = e.clientY;
    draw();
  });
  canvas.addEventListener("mouseup", () => {
    dragging = false;
  });
  resetButton.addEventListener("click", () => view.reset());
  ciToggle.addEventListener("change", () => view.toggleCi(ciToggle.checked));

  const view: Surface3DView = {
    root,
    canvas,
    readout,
    camera: () => ({ ...camera }),
    toggleCi(show) {
      showCi = show && Boolean(surface.ci_layers);
      ciToggle.checked = showCi;
      draw();
    },
    ciShown: () => showCi,
    reset() {
      camera = resetCamera();
      draw();
    },
    pointValues() {
      return buildMesh(surface, camera, width, height, showCi).values.point;
    },
    valueAt(time, predictor) {
      const c = nearestIndex(surface.time_grid, time);
      const r = nearestIndex(surface.predictor_grid, predictor);
      const value = surface.z[r][c];
      readout.dataset.value = String(value);
      readout.textContent =
        `t=${surface.time_grid[c]}  predictor=${surface.predictor_grid[r]}  ` +
        `z=${value}`;
      return value;
    },
  };
  draw();
  return view;
}
