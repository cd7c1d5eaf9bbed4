/**
 * Minimal deterministic SVG assembly: linear scales, axes with tick labels,
 * polylines, markers, bars, error bars and a legend.  Pure string building,
 * fixed number formatting, no randomness or timestamps: identical inputs
 * yield identical bytes.
 */

import { Series } from "./series.js";

export const PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];
const DASHES = ["", "6 3", "2 3", "8 3 2 3", "1 2", "10 4"];

export function fmt(v: number): string {
  if (!Number.isFinite(v)) throw new Error(`cannot place non-finite coordinate ${v}`);
  if (v === 0) return "0";
  const out = v.toPrecision(6);
  return out.includes(".") || out.includes("e")
    ? out.replace(/\.?0+($|e)/, "$1")
    : out;
}

export interface Scale {
  (v: number): number;
  ticks: number[];
}

export function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  if (hi === lo) {
    hi = lo + 1;
    lo -= 1;
  }
  const f = ((v: number) => outLo + ((v - lo) / (hi - lo)) * (outHi - outLo)) as Scale;
  f.ticks = niceTicks(lo, hi, 6);
  return f;
}

export function niceTicks(lo: number, hi: number, n: number): number[] {
  const span = hi - lo;
  const raw = span / Math.max(1, n);
  const mag = 10 ** Math.floor(Math.log10(raw));
  const step = [1, 2, 2.5, 5, 10].map((m) => m * mag).find((s) => span / s <= n) ?? mag * 10;
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= hi + 1e-9 * span; v += step) {
    ticks.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return ticks;
}

export function pad(values: number[], frac = 0.05): [number, number] {
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || Math.abs(hi) || 1;
  return [lo - frac * span, hi + frac * span];
}

export interface Frame {
  width: number;
  height: number;
  left: number;
  right: number;
  top: number;
  bottom: number;
}

export function defaultFrame(width = 640, height = 420): Frame {
  return { width, height, left: 62, right: 18, top: 34, bottom: 46 };
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderFigure(
  series: Series[],
  frame: Frame,
  opts: { title?: string; xLabel?: string; yLabel?: string; xTickFmt?: (v: number) => string },
): string {
  const xs = series.flatMap((s) => s.x);
  const ysLow = series.flatMap((s) => s.y.map((v, i) => v - (s.err?.[i] ?? 0)));
  const ysHigh = series.flatMap((s) => s.y.map((v, i) => v + (s.err?.[i] ?? 0)));
  if (xs.length === 0) throw new Error("nothing to plot: every series is empty");
  const hasBars = series.some((s) => s.style === "bars");
  const [xLo, xHi] = pad(xs);
  const [yLo, yHi] = pad(hasBars ? [...ysLow, ...ysHigh, 0] : [...ysLow, ...ysHigh]);
  const sx = linearScale(xLo, xHi, frame.left, frame.width - frame.right);
  const sy = linearScale(yLo, yHi, frame.height - frame.bottom, frame.top);
  const xFmt = opts.xTickFmt ?? fmt;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${frame.width}" height="${frame.height}" ` +
      `viewBox="0 0 ${frame.width} ${frame.height}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${frame.width}" height="${frame.height}" fill="white"/>`);

  // axes and ticks
  const axisY = frame.height - frame.bottom;
  parts.push(
    `<g stroke="#222" stroke-width="1">` +
      `<line x1="${frame.left}" y1="${axisY}" x2="${frame.width - frame.right}" y2="${axisY}"/>` +
      `<line x1="${frame.left}" y1="${frame.top}" x2="${frame.left}" y2="${axisY}"/></g>`,
  );
  for (const v of sx.ticks) {
    const x = fmt(sx(v));
    parts.push(
      `<line x1="${x}" y1="${axisY}" x2="${x}" y2="${axisY + 4}" stroke="#222"/>` +
        `<text x="${x}" y="${axisY + 17}" font-size="11" text-anchor="middle">${esc(xFmt(v))}</text>`,
    );
  }
  for (const v of sy.ticks) {
    const y = fmt(sy(v));
    parts.push(
      `<line x1="${frame.left - 4}" y1="${y}" x2="${frame.left}" y2="${y}" stroke="#222"/>` +
        `<text x="${frame.left - 7}" y="${y}" font-size="11" text-anchor="end" ` +
        `dominant-baseline="middle">${esc(fmt(v))}</text>`,
    );
  }

  if (opts.title) {
    parts.push(
      `<text x="${(frame.left + frame.width - frame.right) / 2}" y="20" font-size="14" ` +
        `text-anchor="middle">${esc(opts.title)}</text>`,
    );
  }
  if (opts.xLabel) {
    parts.push(
      `<text x="${(frame.left + frame.width - frame.right) / 2}" y="${frame.height - 10}" ` +
        `font-size="12" text-anchor="middle">${esc(opts.xLabel)}</text>`,
    );
  }
  if (opts.yLabel) {
    const y = (frame.top + axisY) / 2;
    parts.push(
      `<text x="16" y="${fmt(y)}" font-size="12" text-anchor="middle" ` +
        `transform="rotate(-90 16 ${fmt(y)})">${esc(opts.yLabel)}</text>`,
    );
  }

  // data
  series.forEach((s, si) => {
    const color = PALETTE[si % PALETTE.length];
    const dash = DASHES[si % DASHES.length];
    if (s.style === "bars") {
      const barW = s.x.length > 1 ? (sx(s.x[1]) - sx(s.x[0])) * 0.92 : 8;
      for (let i = 0; i < s.x.length; i += 1) {
        const x0 = sx(s.x[i]) - barW / 2;
        const y0 = sy(s.y[i]);
        parts.push(
          `<rect x="${fmt(x0)}" y="${fmt(Math.min(y0, sy(0)))}" width="${fmt(barW)}" ` +
            `height="${fmt(Math.abs(sy(0) - y0))}" fill="${color}" fill-opacity="0.55"/>`,
        );
      }
      return;
    }
    const points = s.x.map((v, i) => `${fmt(sx(v))},${fmt(sy(s.y[i]))}`).join(" ");
    if (s.style === "line" || s.x.length > 1) {
      parts.push(
        `<polyline points="${points}" fill="none" stroke="${color}" stroke-width="1.6"` +
          (dash && s.style === "line" ? ` stroke-dasharray="${dash}"` : "") +
          `/>`,
      );
    }
    if (s.style === "markers") {
      for (let i = 0; i < s.x.length; i += 1) {
        parts.push(
          `<circle cx="${fmt(sx(s.x[i]))}" cy="${fmt(sy(s.y[i]))}" r="3" fill="${color}"/>`,
        );
        if (s.err) {
          const x = fmt(sx(s.x[i]));
          parts.push(
            `<line x1="${x}" y1="${fmt(sy(s.y[i] - s.err[i]))}" x2="${x}" ` +
              `y2="${fmt(sy(s.y[i] + s.err[i]))}" stroke="${color}" stroke-width="1"/>`,
          );
        }
      }
    }
  });

  // legend
  const legendX = frame.left + 10;
  series.forEach((s, si) => {
    const color = PALETTE[si % PALETTE.length];
    const y = frame.top + 8 + si * 16;
    parts.push(
      `<rect x="${legendX}" y="${y - 5}" width="14" height="6" fill="${color}"/>` +
        `<text x="${legendX + 20}" y="${y + 1}" font-size="11">${esc(s.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
