/**
 * Energy-convergence plot: total, kinetic and endpoint terms against the
 * optimizer iteration on a log10 axis.  Nonpositive values (the kinetic
 * term starts at zero) are skipped rather than clipped.
 */

import * as fs from "fs";
import * as path from "path";

import { EnergyRow, readEnergyCsv } from "./formats";
import { encodePng } from "./png";
import { Canvas, Color, textWidth } from "./raster";

export interface EnergyPlotOptions {
  width?: number;
  height?: number;
  outDir?: string;
}

const SERIES: { key: keyof EnergyRow; label: string; color: Color }[] = [
  { key: "total", label: "total", color: [0.1, 0.1, 0.6] },
  { key: "kinetic", label: "kinetic", color: [0.75, 0.45, 0.05] },
  { key: "endpoint", label: "endpoint", color: [0.7, 0.1, 0.1] },
];

export function renderEnergy(resultDir: string,
                             options: EnergyPlotOptions = {}): string {
  const rows = readEnergyCsv(path.join(resultDir, "energy.csv"));
  const width = options.width ?? 640;
  const height = options.height ?? 420;
  const outDir = options.outDir ?? path.join(resultDir, "render");

  const margin = { left: 66, right: 16, top: 18, bottom: 40 };
  const plotW = width - margin.left - margin.right;
  const plotH = height - margin.top - margin.bottom;

  let lo = Infinity;
  let hi = -Infinity;
  for (const row of rows) {
    for (const s of SERIES) {
      const v = row[s.key] as number;
      if (v > 0) {
        lo = Math.min(lo, v);
        hi = Math.max(hi, v);
      }
    }
  }
  if (!(hi > 0)) throw new Error("no positive energy values to plot");
  let logLo = Math.floor(Math.log10(lo));
  let logHi = Math.ceil(Math.log10(hi));
  if (logHi === logLo) logHi += 1;
  const maxIter = Math.max(1, rows[rows.length - 1].iter);

  const x = (iter: number) => margin.left + (iter / maxIter) * plotW;
  const y = (v: number) =>
    margin.top + plotH - ((Math.log10(v) - logLo) / (logHi - logLo)) * plotH;

  const canvas = new Canvas(width, height);
  const axis: Color = [0.2, 0.2, 0.2];
  const faint: Color = [0.85, 0.85, 0.88];

  // decade grid lines + y tick labels (as powers of ten)
  for (let d = logLo; d <= logHi; d++) {
    const yy = y(Math.pow(10, d));
    canvas.segment(margin.left, yy, width - margin.right, yy, 1,
                   d === logLo ? axis : faint);
    canvas.text(6, yy - 3, `1e${d}`, axis, 1);
  }
  // x ticks: 5 of them, integer iterations
  for (let i = 0; i <= 4; i++) {
    const iter = Math.round((i / 4) * maxIter);
    const xx = x(iter);
    canvas.segment(xx, height - margin.bottom, xx, height - margin.bottom + 4,
                   1, axis);
    const label = String(iter);
    canvas.text(xx - textWidth(label) / 2, height - margin.bottom + 8, label,
                axis, 1);
  }
  canvas.segment(margin.left, margin.top, margin.left, height - margin.bottom,
                 1, axis);
  canvas.text(margin.left + plotW / 2 - textWidth("iter"), height - 16, "iter",
              axis, 1);

  for (const s of SERIES) {
    const pts: number[][] = [];
    for (const row of rows) {
      const v = row[s.key] as number;
      if (v > 0) pts.push([x(row.iter), y(v)]);
    }
    canvas.polyline(pts, 1.6, s.color);
  }

  // legend
  let lx = margin.left + 12;
  const ly = margin.top + 6;
  for (const s of SERIES) {
    canvas.fillRect(lx, ly, 10, 10, s.color);
    canvas.text(lx + 14, ly + 1, s.label, axis, 1);
    lx += 14 + textWidth(s.label) + 18;
  }

  fs.mkdirSync(outDir, { recursive: true });
  const file = path.join(outDir, "energy.png");
  fs.writeFileSync(file, encodePng(width, height, canvas.toRgbBytes()));
  return file;
}
