/**
 * Procedural 8x8 digit-glyph dataset: ten fixed bitmaps, jittered per sample
 * into firing rates and rate-encoded into spike rasters. Self-contained and
 * fully deterministic, so tests never need a download.
 */

import { Rng } from "./rng.js";

export const GLYPHS: readonly (readonly string[])[] = [
  [
    "..####..",
    ".##..##.",
    ".#....#.",
    ".#....#.",
    ".#....#.",
    ".#....#.",
    ".##..##.",
    "..####..",
  ],
  [
    "...##...",
    "..###...",
    ".####...",
    "...##...",
    "...##...",
    "...##...",
    "...##...",
    ".######.",
  ],
  [
    "..####..",
    ".#....#.",
    "......#.",
    ".....##.",
    "...##...",
    "..#.....",
    ".#......",
    ".######.",
  ],
  [
    "..####..",
    ".#....#.",
    "......#.",
    "...###..",
    "......#.",
    "......#.",
    ".#....#.",
    "..####..",
  ],
  [
    "....##..",
    "...###..",
    "..#.##..",
    ".#..##..",
    ".######.",
    "....##..",
    "....##..",
    "....##..",
  ],
  [
    ".######.",
    ".#......",
    ".#......",
    ".#####..",
    "......#.",
    "......#.",
    ".#....#.",
    "..####..",
  ],
  [
    "..####..",
    ".#......",
    ".#......",
    ".#####..",
    ".#....#.",
    ".#....#.",
    ".#....#.",
    "..####..",
  ],
  [
    ".######.",
    "......#.",
    ".....#..",
    "....#...",
    "...#....",
    "...#....",
    "...#....",
    "...#....",
  ],
  [
    "..####..",
    ".#....#.",
    ".#....#.",
    "..####..",
    ".#....#.",
    ".#....#.",
    ".#....#.",
    "..####..",
  ],
  [
    "..####..",
    ".#....#.",
    ".#....#.",
    "..#####.",
    "......#.",
    "......#.",
    "......#.",
    "..####..",
  ],
];

export const N_PIXELS = 64;
export const N_CLASSES = 10;

export interface Sample {
  label: number;
  rates: Float64Array;
  /** nSteps rows of nChannels 0/1 entries. */
  raster: Uint8Array[];
}

export interface DatasetOptions {
  seed: number;
  trainPerClass: number;
  testPerClass: number;
  nSteps: number;
  hiRate?: number;
  loRate?: number;
  jitter?: number;
  maxFlips?: number;
}

function glyphRates(digit: number, rng: Rng, opts: Required<DatasetOptions>): Float64Array {
  const rates = new Float64Array(N_PIXELS);
  const rows = GLYPHS[digit];
  for (let r = 0; r < 8; r++) {
    for (let c = 0; c < 8; c++) {
      const on = rows[r][c] === "#";
      let rate = (on ? opts.hiRate : opts.loRate) + rng.range(-opts.jitter, opts.jitter);
      rates[r * 8 + c] = Math.min(1, Math.max(0, rate));
    }
  }
  const flips = rng.int(opts.maxFlips + 1);
  for (let f = 0; f < flips; f++) {
    const p = rng.int(N_PIXELS);
    rates[p] = Math.min(1, Math.max(0, 1 - rates[p]));
  }
  return rates;
}

function encode(rates: Float64Array, nSteps: number, rng: Rng): Uint8Array[] {
  const raster: Uint8Array[] = [];
  for (let t = 0; t < nSteps; t++) {
    const row = new Uint8Array(rates.length);
    for (let c = 0; c < rates.length; c++) {
      row[c] = rng.next() < rates[c] ? 1 : 0;
    }
    raster.push(row);
  }
  return raster;
}

/** Build deterministic train/test splits. Every sample owns its raster. */
export function makeDataset(options: DatasetOptions): { train: Sample[]; test: Sample[] } {
  const opts: Required<DatasetOptions> = {
    hiRate: 0.85,
    loRate: 0.05,
    jitter: 0.1,
    maxFlips: 2,
    ...options,
  };
  const make = (count: number, rng: Rng): Sample[] => {
    const out: Sample[] = [];
    for (let i = 0; i < count; i++) {
      for (let digit = 0; digit < N_CLASSES; digit++) {
        const rates = glyphRates(digit, rng, opts);
        out.push({ label: digit, rates, raster: encode(rates, opts.nSteps, rng) });
      }
    }
    return out;
  };
  return {
    train: make(opts.trainPerClass, new Rng(opts.seed)),
    test: make(opts.testPerClass, new Rng(opts.seed ^ 0x5f3759df)),
  };
}
