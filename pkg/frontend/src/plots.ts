/** SVG chart builders for the two dataset kinds the lab produces:
 * magnitude spectra (|S21| vs frequency) and correlation decays (c_avg vs
 * cycle index with the fitted curve overlaid). Pure functions, no DOM. */

import type { DatasetPayload } from "./api.js";

const W = 640;
const H = 320;
const PAD = 44;

interface Scale {
  (value: number): number;
}

function linear(domain: [number, number], range: [number, number]): Scale {
  const span = domain[1] - domain[0] || 1;
  return (value) =>
    range[0] + ((value - domain[0]) / span) * (range[1] - range[0]);
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!isFinite(lo)) return [0, 1];
  if (lo === hi) return [lo - 1, hi + 1];
  return [lo, hi];
}

function frame(title: string, xLabel: string, yLabel: string,
               body: string): string {
  return (
    `<svg viewBox="0 0 ${W} ${H}" class="plot" role="img">` +
    `<rect x="0" y="0" width="${W}" height="${H}" class="plot-bg"/>` +
    `<text x="${W / 2}" y="16" class="plot-title">${title}</text>` +
    `<text x="${W / 2}" y="${H - 6}" class="plot-xlabel">${xLabel}</text>` +
    `<text x="12" y="${H / 2}" class="plot-ylabel" transform="rotate(-90 12 ${H / 2})">${yLabel}</text>` +
    body +
    `</svg>`
  );
}

function polyline(xs: number[], ys: number[], sx: Scale, sy: Scale,
                  cls: string): string {
  const points = xs
    .map((x, i) => `${sx(x).toFixed(1)},${sy(ys[i]!).toFixed(1)}`)
    .join(" ");
  return `<polyline class="${cls}" fill="none" points="${points}"/>`;
}

export function magnitudeDb(re: number[], im: number[]): number[] {
  return re.map((r, i) => {
    const mag = Math.hypot(r, im[i]!);
    return 20 * Math.log10(Math.max(mag, 1e-12));
  });
}

/** |S21| spectrum plot from a sweep dataset with freq/s21_re/s21_im. */
export function sweepPlot(dataset: DatasetPayload): string {
  const freq = dataset.columns["freq"];
  const re = dataset.columns["s21_re"];
  const im = dataset.columns["s21_im"];
  if (!freq || !re || !im) {
    throw new Error("dataset has no freq/s21_re/s21_im columns");
  }
  const ghz = freq.map((f) => f / 1e9);
  const db = magnitudeDb(re, im);
  const sx = linear(extent(ghz), [PAD, W - PAD]);
  const sy = linear(extent(db), [H - PAD, PAD]);
  return frame(
    "|S21| spectrum",
    "frequency (GHz)",
    "|S21| (dB)",
    polyline(ghz, db, sx, sy, "trace"),
  );
}

export interface LeakageFitParams {
  A: number;
  B: number;
  L: number;
}

export function decayCurve(fit: LeakageFitParams, js: number[]): number[] {
  return js.map((j) => 0.5 * (fit.A + fit.B * Math.pow(1 - fit.L, j)));
}

/** Correlation-decay plot from a qnd dataset (j, c_avg); when fit params
 * are known (from STATE) the fitted curve is overlaid. */
export function correlationPlot(dataset: DatasetPayload,
                                fit?: LeakageFitParams): string {
  const js = dataset.columns["j"];
  const c = dataset.columns["c_avg"];
  if (!js || !c) throw new Error("dataset has no j/c_avg columns");
  const sx = linear(extent(js), [PAD, W - PAD]);
  const sy = linear([Math.min(0.45, ...c), 1.0], [H - PAD, PAD]);
  const dots = js
    .map((j, i) =>
      `<circle class="dot" cx="${sx(j).toFixed(1)}" cy="${sy(c[i]!).toFixed(1)}" r="3"/>`)
    .join("");
  let overlay = "";
  if (fit) {
    overlay = polyline(js, decayCurve(fit, js), sx, sy, "fit-curve");
  }
  return frame(
    "readout correlation decay",
    "cycle index j",
    "average correlation",
    dots + overlay,
  );
}

/** Route a dataset to the right chart using its meta.kind. */
export function plotDataset(dataset: DatasetPayload,
                            fit?: LeakageFitParams): string {
  const kind = String(dataset.meta["kind"] ?? "");
  if (kind.startsWith("qnd")) return correlationPlot(dataset, fit);
  if (dataset.columns["freq"]) return sweepPlot(dataset);
  if (dataset.columns["j"]) return correlationPlot(dataset, fit);
  throw new Error(`no chart for dataset kind ${kind || "(unknown)"}`);
}
