/** Plot specification: one JSON file describes one output figure. */

import { readFileSync } from "node:fs";

export type PlotKind =
  | "snapshot-overlay"
  | "convergence"
  | "front-clt"
  | "marginal-vs-time";

export interface PlotInput {
  path: string;
  label: string;
}

export interface PlotSpec {
  kind: PlotKind;
  inputs: PlotInput[];
  output: string;
  title?: string;
  xLabel?: string;
  yLabel?: string;
  width?: number;
  height?: number;
  /** front-clt: law parameters and histogram bin count */
  q?: number;
  t?: number;
  bins?: number;
  /** marginal-vs-time: which marginal to plot */
  node?: number;
  state?: "S" | "I" | "R";
}

const KINDS: PlotKind[] = [
  "snapshot-overlay",
  "convergence",
  "front-clt",
  "marginal-vs-time",
];

export function validateSpec(raw: unknown): PlotSpec {
  if (typeof raw !== "object" || raw === null) throw new Error("spec must be a JSON object");
  const spec = raw as Partial<PlotSpec>;
  if (!spec.kind || !KINDS.includes(spec.kind)) {
    throw new Error(`spec.kind must be one of ${KINDS.join(", ")}`);
  }
  if (!Array.isArray(spec.inputs) || spec.inputs.length === 0) {
    throw new Error("spec.inputs must be a non-empty array of {path, label}");
  }
  for (const input of spec.inputs) {
    if (typeof input.path !== "string" || typeof input.label !== "string") {
      throw new Error("every input needs a string path and label");
    }
  }
  if (typeof spec.output !== "string" || spec.output.length === 0) {
    throw new Error("spec.output must name the image file to write");
  }
  if (spec.kind === "front-clt") {
    if (typeof spec.q !== "number" || typeof spec.t !== "number") {
      throw new Error("front-clt specs need the law parameters q and t");
    }
  }
  if (spec.kind === "marginal-vs-time") {
    if (typeof spec.node !== "number") throw new Error("marginal-vs-time specs need a node");
  }
  return spec as PlotSpec;
}

export function loadSpec(path: string): PlotSpec {
  return validateSpec(JSON.parse(readFileSync(path, "utf8")));
}
