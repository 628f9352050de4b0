/**
 * Geodesic filmstrips: the deforming template at requested times, drawn with
 * vertex markers over the flowed grid.  Meshes are drawn as orthographic
 * wireframes.  Output is one PNG per time plus a combined strip, and a
 * manifest with the frame indices and time labels used.
 */

import * as fs from "fs";
import * as path from "path";

import { Curve, FrameSet, Mesh, loadFrameSet, readCurves, readOff } from "./formats";
import { encodePng } from "./png";
import { Canvas, Color } from "./raster";

export interface GeodesicOptions {
  times?: number[];
  size?: number; // panel size in pixels
  outDir?: string;
}

export interface PanelInfo {
  file: string;
  time: number;
  label: string;
  frameIndex: number;
}

export interface GeodesicManifest {
  source: string;
  frame_count: number;
  panels: PanelInfo[];
  filmstrip: string;
}

const CURVE_COLOR: Color = [0.78, 0.1, 0.1];
const MARKER_COLOR: Color = [0.1, 0.6, 0.15];
const GRID_COLOR: Color = [0.65, 0.65, 0.75];
const WIRE_COLOR: Color = [0.25, 0.25, 0.35];
const LABEL_COLOR: Color = [0.15, 0.15, 0.15];

function nearestFrame(times: number[], t: number): number {
  let best = 0;
  for (let i = 1; i < times.length; i++) {
    if (Math.abs(times[i] - t) < Math.abs(times[best] - t)) best = i;
  }
  return best;
}

/** Orthographic projection for meshes: a fixed gentle tilt. */
function projectMesh(mesh: Mesh): number[][] {
  const c1 = Math.cos(0.4), s1 = Math.sin(0.4);
  const c2 = Math.cos(0.3), s2 = Math.sin(0.3);
  return mesh.vertices.map(([x, y, z]) => {
    const y1 = c1 * y - s1 * z;
    const z1 = s1 * y + c1 * z;
    const x2 = c2 * x + s2 * z1;
    return [x2, y1];
  });
}

interface Bounds {
  min: number[];
  max: number[];
}

function growBounds(b: Bounds, pts: number[][]): void {
  for (const p of pts) {
    b.min[0] = Math.min(b.min[0], p[0]);
    b.min[1] = Math.min(b.min[1], p[1]);
    b.max[0] = Math.max(b.max[0], p[0]);
    b.max[1] = Math.max(b.max[1], p[1]);
  }
}

function makeMapper(b: Bounds, size: number, margin: number) {
  const spanX = b.max[0] - b.min[0];
  const spanY = b.max[1] - b.min[1];
  const span = Math.max(spanX, spanY, 1e-12);
  const scale = (size - 2 * margin) / span;
  const cx = 0.5 * (b.min[0] + b.max[0]);
  const cy = 0.5 * (b.min[1] + b.max[1]);
  return (p: number[]): number[] => [
    size / 2 + (p[0] - cx) * scale,
    size / 2 - (p[1] - cy) * scale, // flip y: image rows grow downward
  ];
}

export function renderGeodesic(resultDir: string,
                               options: GeodesicOptions = {}): GeodesicManifest {
  const frameset: FrameSet = loadFrameSet(resultDir);
  const times = options.times ?? [0.0, 0.3, 0.7, 1.0];
  const size = options.size ?? 360;
  const outDir = options.outDir ?? path.join(resultDir, "render");
  const frameTimes = frameset.result.times;

  const picks = times.map((t) => nearestFrame(frameTimes, t));
  const panels: { pixels: Canvas; info: PanelInfo }[] = [];

  // shared bounds over the selected frames (and their grids) keep the
  // filmstrip panels on one coordinate frame
  const bounds: Bounds = {
    min: [Infinity, Infinity],
    max: [-Infinity, -Infinity],
  };
  const loaded: {
    curves?: Curve[];
    meshPts?: number[][];
    mesh?: Mesh;
    grid?: Curve[];
  }[] = [];
  for (const k of picks) {
    if (frameset.kind === "curves") {
      const curves = readCurves(frameset.frameFiles[k]);
      curves.forEach((c) => growBounds(bounds, c.vertices));
      let grid: Curve[] | undefined;
      if (frameset.gridFiles.length > k) {
        grid = readCurves(frameset.gridFiles[k]);
        grid.forEach((c) => growBounds(bounds, c.vertices));
      }
      loaded.push({ curves, grid });
    } else {
      const mesh = readOff(frameset.frameFiles[k]);
      const pts = projectMesh(mesh);
      growBounds(bounds, pts);
      loaded.push({ mesh, meshPts: pts });
    }
  }

  fs.mkdirSync(outDir, { recursive: true });
  const map = makeMapper(bounds, size, 18);
  picks.forEach((k, i) => {
    const canvas = new Canvas(size, size);
    const item = loaded[i];
    if (item.grid) {
      for (const line of item.grid) {
        canvas.polyline(line.vertices.map(map), 1.0, GRID_COLOR, line.closed);
      }
    }
    if (item.curves) {
      for (const curve of item.curves) {
        const pts = curve.vertices.map(map);
        canvas.polyline(pts, 1.8, CURVE_COLOR, curve.closed);
        for (const p of pts) canvas.disc(p[0], p[1], 2.0, MARKER_COLOR);
      }
    }
    if (item.mesh && item.meshPts) {
      const pts = item.meshPts.map(map);
      const drawn = new Set<string>();
      for (const [a, b, c] of item.mesh.triangles) {
        for (const [u, v] of [[a, b], [b, c], [c, a]]) {
          const key = u < v ? `${u}-${v}` : `${v}-${u}`;
          if (!drawn.has(key)) {
            drawn.add(key);
            canvas.segment(pts[u][0], pts[u][1], pts[v][0], pts[v][1], 0.9,
                           WIRE_COLOR);
          }
        }
      }
    }
    const label = `t=${frameTimes[k].toFixed(2)}`;
    canvas.text(8, 8, label, LABEL_COLOR, 2);
    panels.push({
      pixels: canvas,
      info: {
        file: path.join(outDir, `geodesic_${label.replace("=", "")}.png`),
        time: frameTimes[k],
        label,
        frameIndex: k,
      },
    });
  });

  for (const panel of panels) {
    fs.writeFileSync(panel.info.file,
                     encodePng(size, size, panel.pixels.toRgbBytes()));
  }

  // horizontal filmstrip
  const strip = new Canvas(size * panels.length, size);
  panels.forEach((panel, i) => {
    for (let y = 0; y < size; y++) {
      for (let x = 0; x < size; x++) {
        strip.blend(i * size + x, y, panel.pixels.pixel(x, y), 1);
      }
    }
  });
  const stripFile = path.join(outDir, "filmstrip.png");
  fs.writeFileSync(stripFile,
                   encodePng(size * panels.length, size, strip.toRgbBytes()));

  const manifest: GeodesicManifest = {
    source: resultDir,
    frame_count: frameset.frameFiles.length,
    panels: panels.map((p) => p.info),
    filmstrip: stripFile,
  };
  fs.writeFileSync(path.join(outDir, "render_manifest.json"),
                   JSON.stringify(manifest, null, 2) + "\n");
  return manifest;
}
