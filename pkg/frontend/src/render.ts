/** Dispatch a plot spec to its series builder and assemble the SVG. */

import { dirname, resolve } from "node:path";

import { readCsv, Table } from "./csv.js";
import { convergenceSeries, frontCltSeries, marginalSeries, Series, snapshotSeries } from "./series.js";
import { PlotSpec } from "./spec.js";
import { defaultFrame, fmt, renderFigure } from "./svg.js";

function loadInputs(spec: PlotSpec, baseDir: string): { label: string; table: Table }[] {
  return spec.inputs.map(({ path, label }) => ({
    label,
    table: readCsv(resolve(baseDir, path)),
  }));
}

function logTickLabel(v: number): string {
  return Number.isInteger(v) ? `1e${v}` : fmt(10 ** v);
}

export function buildSeries(spec: PlotSpec, baseDir: string): Series[] {
  const tables = loadInputs(spec, baseDir);
  switch (spec.kind) {
    case "snapshot-overlay":
      return snapshotSeries(tables);
    case "convergence":
      return convergenceSeries(tables);
    case "front-clt":
      return frontCltSeries(tables[0].table, spec);
    case "marginal-vs-time":
      return marginalSeries(tables, spec);
  }
}

const DEFAULT_LABELS: Record<PlotSpec["kind"], { x: string; y: string }> = {
  "snapshot-overlay": { x: "x", y: "S" },
  convergence: { x: "log10 dx", y: "log10 sup error" },
  "front-clt": { x: "(front - q t) / sqrt(t)", y: "density" },
  "marginal-vs-time": { x: "t", y: "probability" },
};

export function renderSpec(spec: PlotSpec, baseDir = "."): string {
  const series = buildSeries(spec, baseDir);
  const frame = defaultFrame(spec.width, spec.height);
  const defaults = DEFAULT_LABELS[spec.kind];
  return renderFigure(series, frame, {
    title: spec.title,
    xLabel: spec.xLabel ?? defaults.x,
    yLabel: spec.yLabel ?? defaults.y,
    xTickFmt: spec.kind === "convergence" ? logTickLabel : undefined,
  });
}

export function specBaseDir(specPath: string): string {
  return dirname(resolve(specPath));
}
