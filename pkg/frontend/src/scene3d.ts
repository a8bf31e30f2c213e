/** Software 3D projection for the rotatable surface view.
 *
 * The mesh builder returns plain data so tests can assert that the point
 * surface is untouched by CI-layer toggles; the canvas painter sorts
 * quads back-to-front and draws CI layers semi-transparent. */

import type { Surface3D } from "./types.js";

export interface Camera {
  yaw: number;   // radians around the z axis
  pitch: number; // radians above the xy plane
  zoom: number;
}

export const DEFAULT_CAMERA: Camera = { yaw: -0.7, pitch: 0.5, zoom: 1.0 };

export interface Quad {
  /** projected corner coordinates, [x, y] each */
  corners: [number, number][];
  depth: number;
  value: number;   // payload z of the cell's lower-left corner
  layer: "point" | "lower" | "upper";
}

export interface Mesh {
  quads: Quad[];
  /** payload z values per layer, untouched by projection */
  values: { point: number[][]; lower?: number[][]; upper?: number[][] };
}

interface Projector {
  (tx: number, py: number, z: number): [number, number, number];
}

function makeProjector(
  surface: Surface3D,
  camera: Camera,
  width: number,
  height: number,
): Projector {
  const t = surface.time_grid;
  const p = surface.predictor_grid;
  const tSpan = t[t.length - 1] - t[0] || 1;
  const pSpan = p[p.length - 1] - p[0] || 1;
  const cosY = Math.cos(camera.yaw);
  const sinY = Math.sin(camera.yaw);
  const cosP = Math.cos(camera.pitch);
  const sinP = Math.sin(camera.pitch);
  const scale = Math.min(width, height) * 0.42 * camera.zoom;
  return (tx, py, z) => {
    const x = (tx - t[0]) / tSpan - 0.5;
    const y = (py - p[0]) / pSpan - 0.5;
    const zc = z - 0.5; // probabilities live on [0, 1]
    const rx = x * cosY - y * sinY;
    const ry = x * sinY + y * cosY;
    const sy = ry * cosP - zc * sinP;
    const depth = ry * sinP + zc * cosP;
    return [width / 2 + rx * scale, height / 2 + sy * scale, depth];
  };
}

function layerQuads(
  surface: Surface3D,
  grid: number[][],
  layer: Quad["layer"],
  project: Projector,
): Quad[] {
  const t = surface.time_grid;
  const p = surface.predictor_grid;
  const quads: Quad[] = [];
  for (let r = 0; r + 1 < p.length; r++) {
    for (let c = 0; c + 1 < t.length; c++) {
      const corners3 = [
        project(t[c], p[r], grid[r][c]),
        project(t[c + 1], p[r], grid[r][c + 1]),
        project(t[c + 1], p[r + 1], grid[r + 1][c + 1]),
        project(t[c], p[r + 1], grid[r + 1][c]),
      ];
      quads.push({
        corners: corners3.map(([x, y]) => [x, y] as [number, number]),
        depth:
          (corners3[0][2] + corners3[1][2] + corners3[2][2] + corners3[3][2]) / 4,
        value: grid[r][c],
        layer,
      });
    }
  }
  return quads;
}

/** Build the projected mesh.  The point-surface values are carried over
 * from the payload verbatim; toggling CI layers only adds or removes the
 * translucent band quads. */
export function buildMesh(
  surface: Surface3D,
  camera: Camera,
  width: number,
  height: number,
  showCi: boolean,
): Mesh {
  const project = makeProjector(surface, camera, width, height);
  const quads = layerQuads(surface, surface.z, "point", project);
  const values: Mesh["values"] = { point: surface.z };
  if (showCi && surface.ci_layers) {
    quads.push(...layerQuads(surface, surface.ci_layers.lower, "lower", project));
    quads.push(...layerQuads(surface, surface.ci_layers.upper, "upper", project));
    values.lower = surface.ci_layers.lower;
    values.upper = surface.ci_layers.upper;
  }
  quads.sort((a, b) => a.depth - b.depth); // painter's algorithm
  return { quads, values };
}

/** Drag rotation: horizontal drag spins the yaw, vertical drag tilts the
 * pitch (clamped away from the poles). */
export function rotateCamera(
  camera: Camera,
  dxPixels: number,
  dyPixels: number,
): Camera {
  const yaw = camera.yaw + dxPixels * 0.01;
  const pitch = Math.max(
    0.05,
    Math.min(1.45, camera.pitch + dyPixels * 0.01),
  );
  return { yaw, pitch, zoom: camera.zoom };
}

export function resetCamera(): Camera {
  return { ...DEFAULT_CAMERA };
}
