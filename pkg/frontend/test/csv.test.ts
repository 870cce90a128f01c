import { describe, expect, it } from "vitest";

import { SchemaError, alphasOf, methodsOf, parseCoverageCsv } from "../src/csv.js";

const HEADER =
  "scenario,method,alpha,tail,coverage,coverage_se,mean_width,width_se,replications,seed";

function row(method: string, alpha: number, tail: string, coverage: number, width = 1.0): string {
  return `bandit,${method},${alpha},${tail},${coverage},0.01,${width},0.005,1000,7`;
}

describe("parseCoverageCsv", () => {
  it("parses harness output rows", () => {
    const text = [HEADER, row("od_direction", 0.05, "two-sided", 0.95)].join("\n");
    const rows = parseCoverageCsv(text);
    expect(rows).toHaveLength(1);
    expect(rows[0].method).toBe("od_direction");
    expect(rows[0].alpha).toBeCloseTo(0.05);
    expect(rows[0].coverage).toBeCloseTo(0.95);
    expect(rows[0].replications).toBe(1000);
  });

  it("lists missing columns in schema errors", () => {
    const bad = "scenario,method,alpha,tail,coverage\nbandit,od,0.05,lower,0.9";
    try {
      parseCoverageCsv(bad);
      expect.unreachable("should have thrown");
    } catch (err) {
      expect(err).toBeInstanceOf(SchemaError);
      const missing = (err as SchemaError).missing;
      expect(missing).toEqual(["coverage_se", "mean_width", "width_se", "replications", "seed"]);
    }
  });

  it("rejects non-numeric numeric cells", () => {
    const bad = [HEADER, "bandit,od,abc,lower,0.9,0.01,1,0.005,10,1"].join("\n");
    expect(() => parseCoverageCsv(bad)).toThrowError(/non-numeric alpha/);
  });

  it("collects methods in first-appearance order and alphas ascending", () => {
    const text = [
      HEADER,
      row("naive_ols", 0.1, "lower", 0.8),
      row("od_direction", 0.05, "lower", 0.94),
      row("naive_ols", 0.05, "lower", 0.82),
    ].join("\n");
    const rows = parseCoverageCsv(text);
    expect(methodsOf(rows)).toEqual(["naive_ols", "od_direction"]);
    expect(alphasOf(rows)).toEqual([0.05, 0.1]);
  });

  it("header-only input has no methods", () => {
    expect(methodsOf(parseCoverageCsv(HEADER))).toEqual([]);
  });
});
