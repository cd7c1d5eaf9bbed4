/** Turn the CSV tables into the (x, y) series each plot kind draws. */

import { column, Table, textColumn } from "./csv.js";
import { PlotSpec } from "./spec.js";

export interface Series {
  label: string;
  x: number[];
  y: number[];
  /** half-width of the error bar around y, when the source carries one */
  err?: number[];
  style: "line" | "markers" | "bars";
}

function sortedBy(x: number[], ...ys: number[][]): number[][] {
  const order = x.map((_, i) => i).sort((a, b) => x[a] - x[b]);
  return [order.map((i) => x[i]), ...ys.map((y) => order.map((i) => y[i]))];
}

/** (t, x, S) continuum-field files: one curve per input. */
export function snapshotSeries(tables: { label: string; table: Table }[]): Series[] {
  return tables.map(({ label, table }) => {
    const [x, y] = sortedBy(column(table, "x"), column(table, "S"));
    return { label, x, y, style: "line" as const };
  });
}

/** (dx, sup_error) tables on log10 axes. */
export function convergenceSeries(tables: { label: string; table: Table }[]): Series[] {
  return tables.map(({ label, table }) => {
    const dx = column(table, "dx").map(Math.log10);
    const err = column(table, "sup_error").map(Math.log10);
    const [x, y] = sortedBy(dx, err);
    return { label, x, y, style: "markers" as const };
  });
}

export interface Histogram {
  centers: number[];
  density: number[];
  binWidth: number;
  count: number;
  excluded: number;
}

/** Normalized front sample (front - q t)/sqrt(t) from a (t, replication, front_k) file. */
export function frontSample(table: Table, q: number, t: number): { z: number[]; excluded: number } {
  const times = column(table, "t");
  const fronts = column(table, "front_k");
  const z: number[] = [];
  let excluded = 0;
  for (let i = 0; i < fronts.length; i += 1) {
    if (Math.abs(times[i] - t) > 1e-9) continue;
    if (fronts[i] < 0) {
      excluded += 1; // no infected node in this replication
      continue;
    }
    z.push((fronts[i] - q * t) / Math.sqrt(t));
  }
  if (z.length === 0) throw new Error(`no front samples at t = ${t}`);
  return { z, excluded };
}

export function histogram(values: number[], bins: number): Histogram {
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const width = (hi - lo) / bins || 1;
  const counts = new Array<number>(bins).fill(0);
  for (const v of values) {
    const j = Math.min(bins - 1, Math.floor((v - lo) / width));
    counts[j] += 1;
  }
  const centers = counts.map((_, j) => lo + (j + 0.5) * width);
  const density = counts.map((c) => c / (values.length * width));
  return { centers, density, binWidth: width, count: values.length, excluded: 0 };
}

export function gaussianDensity(q: number, x: number[]): number[] {
  const norm = 1 / Math.sqrt(2 * Math.PI * q);
  return x.map((v) => norm * Math.exp(-(v * v) / (2 * q)));
}

/** front-clt: histogram bars plus the limiting N(0, q) density curve. */
export function frontCltSeries(table: Table, spec: PlotSpec): Series[] {
  const q = spec.q as number;
  const t = spec.t as number;
  const { z } = frontSample(table, q, t);
  const hist = histogram(z, spec.bins ?? 25);
  const span = Math.max(...z.map(Math.abs)) * 1.1;
  const grid = Array.from({ length: 121 }, (_, i) => -span + (2 * span * i) / 120);
  return [
    { label: "normalized front", x: hist.centers, y: hist.density, style: "bars" },
    { label: `limit law (variance ${q})`, x: grid, y: gaussianDensity(q, grid), style: "line" },
  ];
}

/** One node's marginal against time, from ensemble and/or exact files. */
export function marginalSeries(
  tables: { label: string; table: Table }[],
  spec: PlotSpec,
): Series[] {
  const node = spec.node as number;
  const state = spec.state ?? "S";
  return tables.map(({ label, table }) => {
    if (table.columns.includes("state")) {
      // ensemble file: t,k,state,mean,stderr
      const ks = column(table, "k");
      const states = textColumn(table, "state");
      const keep = ks.map((k, i) => k === node && states[i] === state);
      const pick = (name: string) => column(table, name).filter((_, i) => keep[i]);
      const [x, y, err] = sortedBy(pick("t"), pick("mean"),
        pick("stderr").map((s) => 2 * s));
      return { label, x, y, err, style: "markers" as const };
    }
    // exact file: t,k,S,I,R
    const ks = column(table, "k");
    const keep = ks.map((k) => k === node);
    const pick = (name: string) => column(table, name).filter((_, i) => keep[i]);
    const [x, y] = sortedBy(pick("t"), pick(state));
    return { label, x, y, style: "line" as const };
  });
}
