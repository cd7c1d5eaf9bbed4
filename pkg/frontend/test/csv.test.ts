import { describe, expect, test } from "vitest";

import { column, parseCsv, readCsv, textColumn } from "../src/csv.js";

const SAMPLE = `# sirbass-csv 1
# kind = ensemble
# replications = 2000
t,k,state,mean,stderr
0.0,0,S,1.0,0.0
0.5,0,S,0.8014,0.0089
0.5,0,I,0.1986,0.0089
`;

describe("csv parsing", () => {
  test("splits meta, header and numeric rows", () => {
    const table = parseCsv(SAMPLE);
    expect(table.meta.kind).toBe("ensemble");
    expect(table.meta.replications).toBe("2000");
    expect(table.columns).toEqual(["t", "k", "state", "mean", "stderr"]);
    expect(table.rows).toHaveLength(3);
    expect(column(table, "mean")[1]).toBeCloseTo(0.8014, 12);
    expect(textColumn(table, "state")).toEqual(["S", "S", "I"]);
  });

  test("missing column names the available ones", () => {
    const table = parseCsv(SAMPLE);
    expect(() => column(table, "x")).toThrow(/missing column 'x'.*t, k, state/);
  });

  test("empty file is rejected", () => {
    expect(() => parseCsv("# only comments\n")).toThrow(/no header row/);
  });

  test("fixtures produced by the simulator parse", () => {
    const table = readCsv(new URL("./fixtures/fig1_limit.csv", import.meta.url).pathname);
    expect(table.columns).toEqual(["t", "x", "S"]);
    expect(table.rows.length).toBeGreaterThan(10);
    expect(table.meta.kind).toBe("continuum-field");
  });
});
