/** Shared command-line driver for the two render entry points. */

import { renderEnergy } from "./energy";
import { renderGeodesic } from "./geodesic";

function parseArgs(argv: string[]) {
  const positional: string[] = [];
  const flags: Record<string, string> = {};
  for (let i = 0; i < argv.length; i++) {
    if (argv[i].startsWith("--")) {
      flags[argv[i].slice(2)] = argv[i + 1];
      i++;
    } else {
      positional.push(argv[i]);
    }
  }
  return { positional, flags };
}

export function mainGeodesic(argv: string[]): number {
  const { positional, flags } = parseArgs(argv);
  if (positional.length !== 1) {
    console.error("usage: render-geodesic <result-dir> [--times 0,0.3,0.7,1] [--size 360]");
    return 2;
  }
  try {
    const manifest = renderGeodesic(positional[0], {
      times: flags.times ? flags.times.split(",").map(Number) : undefined,
      size: flags.size ? parseInt(flags.size, 10) : undefined,
      outDir: flags.out,
    });
    for (const p of manifest.panels) console.log(`${p.label} -> ${p.file}`);
    console.log(`filmstrip -> ${manifest.filmstrip}`);
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}

export function mainEnergy(argv: string[]): number {
  const { positional, flags } = parseArgs(argv);
  if (positional.length !== 1) {
    console.error("usage: render-energy <result-dir> [--width 640] [--height 420]");
    return 2;
  }
  try {
    const file = renderEnergy(positional[0], {
      width: flags.width ? parseInt(flags.width, 10) : undefined,
      height: flags.height ? parseInt(flags.height, 10) : undefined,
      outDir: flags.out,
    });
    console.log(`energy plot -> ${file}`);
    return 0;
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
}
