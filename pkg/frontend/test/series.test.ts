import { describe, expect, test } from "vitest";

import { parseCsv } from "../src/csv.js";
import {
  convergenceSeries,
  frontSample,
  gaussianDensity,
  histogram,
  marginalSeries,
  snapshotSeries,
} from "../src/series.js";

const FIELD = `t,x,S
2.0,1.0,0.5
2.0,0.0,0.9
2.0,2.0,0.25
`;

const ERRORS = `dx,sup_error,t_snapshot
0.5,0.01,2.0
0.1,0.001,2.0
`;

const FRONT = `t,replication,front_k
50.0,0,48
50.0,1,-1
50.0,2,53
25.0,3,20
`;

const ENSEMBLE = `t,k,state,mean,stderr
0.0,3,S,1.0,0.0
1.0,3,S,0.6,0.01
1.0,3,I,0.4,0.01
1.0,2,S,0.7,0.01
`;

const EXACT = `t,k,S,I,R
0.0,3,1.0,0.0,0.0
1.0,3,0.61,0.39,0.0
1.0,2,0.71,0.29,0.0
`;

describe("series extraction", () => {
  test("snapshot curves come out sorted by x", () => {
    const [s] = snapshotSeries([{ label: "limit", table: parseCsv(FIELD) }]);
    expect(s.x).toEqual([0.0, 1.0, 2.0]);
    expect(s.y).toEqual([0.9, 0.5, 0.25]);
  });

  test("convergence series are log10 transformed", () => {
    const [s] = convergenceSeries([{ label: "fig1", table: parseCsv(ERRORS) }]);
    expect(s.x).toEqual([-1, Math.log10(0.5)]);
    expect(s.y[0]).toBeCloseTo(-3, 12);
  });

  test("front sample filters the query time and drops empty replications", () => {
    const { z, excluded } = frontSample(parseCsv(FRONT), 1.0, 50.0);
    expect(excluded).toBe(1);
    expect(z).toHaveLength(2);
    expect(z[0]).toBeCloseTo((48 - 50) / Math.sqrt(50), 12);
  });

  test("histogram integrates to one", () => {
    const values = Array.from({ length: 500 }, (_, i) => Math.sin(i * 12.9898) * 2);
    const h = histogram(values, 20);
    const mass = h.density.reduce((acc, d) => acc + d * h.binWidth, 0);
    expect(mass).toBeCloseTo(1.0, 9);
  });

  test("gaussian density peak matches 1/sqrt(2 pi q)", () => {
    expect(gaussianDensity(2.0, [0])[0]).toBeCloseTo(1 / Math.sqrt(4 * Math.PI), 12);
  });

  test("marginal series pick the node and carry 2-sigma bars", () => {
    const series = marginalSeries(
      [
        { label: "mc", table: parseCsv(ENSEMBLE) },
        { label: "exact", table: parseCsv(EXACT) },
      ],
      { kind: "marginal-vs-time", inputs: [], output: "x.svg", node: 3, state: "S" },
    );
    expect(series[0].style).toBe("markers");
    expect(series[0].x).toEqual([0.0, 1.0]);
    expect(series[0].err?.[1]).toBeCloseTo(0.02, 12);
    expect(series[1].style).toBe("line");
    expect(series[1].y).toEqual([1.0, 0.61]);
  });
});
