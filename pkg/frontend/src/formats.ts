/**
 * Readers for the registration pipeline's output files: `.curves` shape
 * documents, OFF meshes, `energy.csv` and `result.json`.  These are the only
 * interfaces to the solver; no internals are consumed.
 */

import * as fs from "fs";
import * as path from "path";

export interface Curve {
  closed: boolean;
  vertices: number[][];
}

export interface Mesh {
  vertices: number[][];
  triangles: number[][];
}

export interface EnergyRow {
  iter: number;
  kinetic: number;
  endpoint: number;
  total: number;
  grad_norm: number;
}

export interface ResultSummary {
  status: string;
  iterations: number;
  initial_distance: number;
  final_distance: number;
  frame_count: number;
  grid_frame_count: number;
  times: number[];
  [key: string]: unknown;
}

export function readCurves(file: string): Curve[] {
  const doc = JSON.parse(fs.readFileSync(file, "utf8"));
  if (!Array.isArray(doc.curves)) {
    throw new Error(`${file}: not a .curves document`);
  }
  return doc.curves.map((c: Curve) => ({
    closed: Boolean(c.closed),
    vertices: c.vertices,
  }));
}

export function readOff(file: string): Mesh {
  const tokens = fs
    .readFileSync(file, "utf8")
    .split("\n")
    .map((line) => line.split("#", 1)[0])
    .join(" ")
    .trim()
    .split(/\s+/);
  if (tokens[0] !== "OFF") throw new Error(`${file}: not an OFF file`);
  const nv = parseInt(tokens[1], 10);
  const nf = parseInt(tokens[2], 10);
  let pos = 4;
  const vertices: number[][] = [];
  for (let i = 0; i < nv; i++) {
    vertices.push([
      parseFloat(tokens[pos]),
      parseFloat(tokens[pos + 1]),
      parseFloat(tokens[pos + 2]),
    ]);
    pos += 3;
  }
  const triangles: number[][] = [];
  for (let i = 0; i < nf; i++) {
    const k = parseInt(tokens[pos], 10);
    if (k !== 3) throw new Error(`${file}: only triangle faces supported`);
    triangles.push([
      parseInt(tokens[pos + 1], 10),
      parseInt(tokens[pos + 2], 10),
      parseInt(tokens[pos + 3], 10),
    ]);
    pos += 4;
  }
  return { vertices, triangles };
}

export function readEnergyCsv(file: string): EnergyRow[] {
  const lines = fs
    .readFileSync(file, "utf8")
    .split("\n")
    .map((l) => l.trim())
    .filter((l) => l.length > 0);
  if (lines.length === 0) throw new Error(`${file}: empty energy table`);
  const header = lines[0].split(",");
  const expected = ["iter", "kinetic", "endpoint", "total", "grad_norm"];
  if (header.join(",") !== expected.join(",")) {
    throw new Error(`${file}: unexpected header ${lines[0]}`);
  }
  const rows = lines.slice(1).map((line) => {
    const parts = line.split(",");
    if (parts.length !== 5) throw new Error(`${file}: malformed row ${line}`);
    const nums = parts.map(Number);
    if (nums.some((x) => Number.isNaN(x))) {
      throw new Error(`${file}: non-numeric row ${line}`);
    }
    return {
      iter: nums[0],
      kinetic: nums[1],
      endpoint: nums[2],
      total: nums[3],
      grad_norm: nums[4],
    };
  });
  if (rows.length === 0) throw new Error(`${file}: no data rows`);
  return rows;
}

export function readResult(dir: string): ResultSummary {
  const file = path.join(dir, "result.json");
  return JSON.parse(fs.readFileSync(file, "utf8")) as ResultSummary;
}

export interface FrameSet {
  dir: string;
  result: ResultSummary;
  frameFiles: string[]; // ordered, indices contiguous from 0
  gridFiles: string[]; // may be empty
  kind: "curves" | "mesh";
}

function orderedFiles(dir: string, prefix: string): string[] {
  if (!fs.existsSync(dir)) return [];
  const files = fs
    .readdirSync(dir)
    .filter((f) => f.startsWith(prefix))
    .sort();
  files.forEach((f, i) => {
    const m = f.match(/_(\d{4})\./);
    if (!m || parseInt(m[1], 10) !== i) {
      throw new Error(`${dir}: frame indices not contiguous at ${f}`);
    }
  });
  return files.map((f) => path.join(dir, f));
}

export function loadFrameSet(resultDir: string): FrameSet {
  const result = readResult(resultDir);
  const frameFiles = orderedFiles(path.join(resultDir, "frames"), "frame_");
  if (frameFiles.length === 0) {
    throw new Error(`${resultDir}: no frames found`);
  }
  const gridFiles = orderedFiles(path.join(resultDir, "grid"), "grid_");
  const kind = frameFiles[0].endsWith(".off") ? "mesh" : "curves";
  return { dir: resultDir, result, frameFiles, gridFiles, kind };
}
