/**
 * Tiny software rasterizer: an RGB float canvas with anti-aliased polylines,
 * filled discs, rectangles and a 5x7 bitmap font.  Everything is pure
 * arithmetic on typed arrays, so renders are deterministic across platforms.
 */

export type Color = [number, number, number];

export class Canvas {
  readonly width: number;
  readonly height: number;
  private data: Float64Array;

  constructor(width: number, height: number, background: Color = [1, 1, 1]) {
    this.width = width;
    this.height = height;
    this.data = new Float64Array(width * height * 3);
    for (let i = 0; i < width * height; i++) {
      this.data[3 * i] = background[0];
      this.data[3 * i + 1] = background[1];
      this.data[3 * i + 2] = background[2];
    }
  }

  blend(x: number, y: number, color: Color, alpha: number): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height || alpha <= 0) {
      return;
    }
    const a = Math.min(1, alpha);
    const i = 3 * (y * this.width + x);
    this.data[i] += a * (color[0] - this.data[i]);
    this.data[i + 1] += a * (color[1] - this.data[i + 1]);
    this.data[i + 2] += a * (color[2] - this.data[i + 2]);
  }

  pixel(x: number, y: number): Color {
    const i = 3 * (y * this.width + x);
    return [this.data[i], this.data[i + 1], this.data[i + 2]];
  }

  toRgbBytes(): Uint8Array {
    const out = new Uint8Array(this.width * this.height * 3);
    for (let i = 0; i < this.data.length; i++) {
      out[i] = Math.max(0, Math.min(255, Math.round(255 * this.data[i])));
    }
    return out;
  }

  /** Anti-aliased stroked segment with round caps. */
  segment(x0: number, y0: number, x1: number, y1: number, width: number,
          color: Color): void {
    const r = width / 2;
    const minX = Math.max(0, Math.floor(Math.min(x0, x1) - r - 1));
    const maxX = Math.min(this.width - 1, Math.ceil(Math.max(x0, x1) + r + 1));
    const minY = Math.max(0, Math.floor(Math.min(y0, y1) - r - 1));
    const maxY = Math.min(this.height - 1, Math.ceil(Math.max(y0, y1) + r + 1));
    const dx = x1 - x0;
    const dy = y1 - y0;
    const len2 = dx * dx + dy * dy;
    for (let py = minY; py <= maxY; py++) {
      for (let px = minX; px <= maxX; px++) {
        const cx = px + 0.5;
        const cy = py + 0.5;
        let t = len2 > 0 ? ((cx - x0) * dx + (cy - y0) * dy) / len2 : 0;
        t = Math.max(0, Math.min(1, t));
        const qx = x0 + t * dx;
        const qy = y0 + t * dy;
        const dist = Math.hypot(cx - qx, cy - qy);
        const cov = Math.max(0, Math.min(1, r + 0.5 - dist));
        if (cov > 0) this.blend(px, py, color, cov);
      }
    }
  }

  polyline(points: number[][], width: number, color: Color, closed = false): void {
    for (let i = 0; i + 1 < points.length; i++) {
      this.segment(points[i][0], points[i][1], points[i + 1][0],
                   points[i + 1][1], width, color);
    }
    if (closed && points.length > 2) {
      const a = points[points.length - 1];
      this.segment(a[0], a[1], points[0][0], points[0][1], width, color);
    }
  }

  disc(cx: number, cy: number, radius: number, color: Color): void {
    const minX = Math.max(0, Math.floor(cx - radius - 1));
    const maxX = Math.min(this.width - 1, Math.ceil(cx + radius + 1));
    const minY = Math.max(0, Math.floor(cy - radius - 1));
    const maxY = Math.min(this.height - 1, Math.ceil(cy + radius + 1));
    for (let py = minY; py <= maxY; py++) {
      for (let px = minX; px <= maxX; px++) {
        const dist = Math.hypot(px + 0.5 - cx, py + 0.5 - cy);
        const cov = Math.max(0, Math.min(1, radius + 0.5 - dist));
        if (cov > 0) this.blend(px, py, color, cov);
      }
    }
  }

  fillRect(x0: number, y0: number, w: number, h: number, color: Color): void {
    for (let y = Math.max(0, Math.floor(y0)); y < Math.min(this.height, y0 + h); y++) {
      for (let x = Math.max(0, Math.floor(x0)); x < Math.min(this.width, x0 + w); x++) {
        this.blend(x, y, color, 1);
      }
    }
  }

  text(x: number, y: number, s: string, color: Color, scale = 1): void {
    let cx = x;
    for (const ch of s) {
      const glyph = FONT[ch];
      if (glyph) {
        for (let row = 0; row < 7; row++) {
          for (let col = 0; col < 5; col++) {
            if (glyph[row][col] === "#") {
              this.fillRect(cx + col * scale, y + row * scale, scale, scale, color);
            }
          }
        }
      }
      cx += 6 * scale;
    }
  }
}

export function textWidth(s: string, scale = 1): number {
  return s.length * 6 * scale;
}

/** 5x7 glyphs for the characters the plots need. */
const FONT: Record<string, string[]> = {
  "0": [".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###."],
  "1": ["..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###."],
  "2": [".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####"],
  "3": [".###.", "#...#", "....#", "..##.", "....#", "#...#", ".###."],
  "4": ["...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#."],
  "5": ["#####", "#....", "####.", "....#", "....#", "#...#", ".###."],
  "6": [".###.", "#....", "#....", "####.", "#...#", "#...#", ".###."],
  "7": ["#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#..."],
  "8": [".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###."],
  "9": [".###.", "#...#", "#...#", ".####", "....#", "....#", ".###."],
  ".": [".....", ".....", ".....", ".....", ".....", ".##..", ".##.."],
  "-": [".....", ".....", ".....", "#####", ".....", ".....", "....."],
  "+": [".....", "..#..", "..#..", "#####", "..#..", "..#..", "....."],
  "=": [".....", ".....", "#####", ".....", "#####", ".....", "....."],
  " ": [".....", ".....", ".....", ".....", ".....", ".....", "....."],
  a: [".....", ".....", ".###.", "....#", ".####", "#...#", ".####"],
  c: [".....", ".....", ".###.", "#....", "#....", "#...#", ".###."],
  d: ["....#", "....#", ".####", "#...#", "#...#", "#...#", ".####"],
  e: [".....", ".....", ".###.", "#...#", "#####", "#....", ".###."],
  g: [".....", ".....", ".####", "#...#", ".####", "....#", ".###."],
  i: ["..#..", ".....", ".##..", "..#..", "..#..", "..#..", ".###."],
  k: ["#....", "#....", "#..#.", "#.#..", "##...", "#.#..", "#..#."],
  l: [".##..", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."],
  m: [".....", ".....", "##.#.", "#.#.#", "#.#.#", "#.#.#", "#.#.#"],
  n: [".....", ".....", "#.##.", "##..#", "#...#", "#...#", "#...#"],
  o: [".....", ".....", ".###.", "#...#", "#...#", "#...#", ".###."],
  p: [".....", ".....", "####.", "#...#", "####.", "#....", "#...."],
  r: [".....", ".....", "#.##.", "##...", "#....", "#....", "#...."],
  s: [".....", ".....", ".####", "#....", ".###.", "....#", "####."],
  t: [".#...", ".#...", "####.", ".#...", ".#...", ".#..#", "..##."],
  u: [".....", ".....", "#...#", "#...#", "#...#", "#..##", ".##.#"],
  x: [".....", ".....", "#...#", ".#.#.", "..#..", ".#.#.", "#...#"],
};
