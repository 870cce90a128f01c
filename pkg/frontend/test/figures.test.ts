import { mkdtempSync, readFileSync, writeFileSync, readdirSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";

import { describe, expect, it } from "vitest";

import { generateFigures, renderFigures } from "../src/figures.js";
import { main } from "../src/cli.js";

const HEADER =
  "scenario,method,alpha,tail,coverage,coverage_se,mean_width,width_se,replications,seed";

function benchmarkCsv(): string {
  const lines = [HEADER];
  const alphas = [0.05, 0.1, 0.2];
  for (const method of ["od_direction", "naive_ols", "concentration"]) {
    for (const alpha of alphas) {
      for (const tail of ["lower", "upper", "two-sided"]) {
        const cov = method === "naive_ols" ? 1 - alpha - 0.06 : Math.min(1, 1 - alpha + 0.01);
        const width = method === "concentration" ? 30 : method === "od_direction" ? 1.0 : 0.3;
        lines.push(
          `bandit,${method},${alpha},${tail},${cov.toFixed(4)},0.008,${width},0.01,1000,20240901`,
        );
      }
    }
  }
  return lines.join("\n") + "\n";
}

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "figs-"));
}

describe("renderFigures", () => {
  it("produces the three-panel layout from a benchmark CSV", () => {
    const figs = renderFigures(benchmarkCsv());
    expect(figs.map((f) => f.name)).toEqual(["coverage_lower.svg", "coverage_upper.svg", "width.svg"]);
    for (const fig of figs) {
      expect(fig.svg.startsWith("<svg ")).toBe(true);
      expect(fig.svg).toContain("od_direction");
      expect(fig.svg).toContain("naive_ols");
    }
    // coverage panels carry the dashed diagonal reference, the width panel does not
    expect(figs[0].svg).toContain("stroke-dasharray");
    expect(figs[2].svg).not.toContain("stroke-dasharray");
  });

  it("puts coverage == 1 - alpha points exactly on the diagonal", () => {
    const lines = [HEADER];
    for (const alpha of [0.05, 0.1, 0.2, 0.3]) {
      lines.push(`sim,od,${alpha},lower,${(1 - alpha).toFixed(6)},0,1,0,100,1`);
    }
    const figs = renderFigures(lines.join("\n"));
    const svg = figs[0].svg;
    const diag = svg.match(
      /<line x1="([-\d.]+)" y1="([-\d.]+)" x2="([-\d.]+)" y2="([-\d.]+)" stroke="#888888" stroke-dasharray/,
    );
    expect(diag).not.toBeNull();
    const [x1, y1, x2, y2] = diag!.slice(1, 5).map(Number);
    const slope = (y2 - y1) / (x2 - x1);
    const circles = [...svg.matchAll(/<circle cx="([-\d.]+)" cy="([-\d.]+)"/g)];
    expect(circles.length).toBe(4);
    for (const c of circles) {
      const cx = Number(c[1]);
      const cy = Number(c[2]);
      const expected = y1 + slope * (cx - x1);
      expect(Math.abs(cy - expected)).toBeLessThan(0.05); // on the diagonal
    }
  });

  it("is byte-identical across re-runs", () => {
    const dir = tmp();
    writeFileSync(join(dir, "coverage.csv"), benchmarkCsv());
    const out1 = join(dir, "o1");
    const out2 = join(dir, "o2");
    generateFigures(dir, out1);
    generateFigures(dir, out2);
    for (const name of readdirSync(out1)) {
      expect(readFileSync(join(out1, name))).toEqual(readFileSync(join(out2, name)));
    }
  });

  it("warns and writes nothing for an empty method set", () => {
    const dir = tmp();
    writeFileSync(join(dir, "coverage.csv"), HEADER + "\n");
    const result = generateFigures(dir, join(dir, "out"));
    expect(result.written).toEqual([]);
    expect(result.warnings).toHaveLength(1);
  });
});

describe("bandit benchmark fixture", () => {
  // coverage.csv emitted by the real experiment harness (eps-greedy
  // benchmark, 1000 replications); regenerating must give the fixed
  // three-panel layout, and re-running must be byte-identical
  const fixture = readFileSync(join(__dirname, "fixtures", "bandit_benchmark_coverage.csv"), "utf8");

  it("renders the three-panel layout", () => {
    const figs = renderFigures(fixture);
    expect(figs.map((f) => f.name)).toEqual([
      "coverage_lower.svg",
      "coverage_upper.svg",
      "width.svg",
    ]);
    for (const method of ["od_direction", "naive_ols", "naive_od", "concentration"]) {
      expect(figs[0].svg).toContain(method);
    }
  });

  it("is byte-identical across re-runs", () => {
    const a = renderFigures(fixture);
    const b = renderFigures(fixture);
    for (let i = 0; i < a.length; i++) {
      expect(a[i].svg === b[i].svg).toBe(true);
    }
  });
});

describe("cli", () => {
  it("exits 0 with a warning on an empty method set", () => {
    const dir = tmp();
    writeFileSync(join(dir, "coverage.csv"), HEADER + "\n");
    expect(main(["--in", dir, "--out", join(dir, "out")])).toBe(0);
  });

  it("exits 1 on schema mismatch", () => {
    const dir = tmp();
    writeFileSync(join(dir, "coverage.csv"), "a,b,c\n1,2,3\n");
    expect(main(["--in", dir, "--out", join(dir, "out")])).toBe(1);
  });

  it("exits 2 on bad arguments", () => {
    expect(main(["--whatever"])).toBe(2);
  });

  it("writes three svg files end to end", () => {
    const dir = tmp();
    writeFileSync(join(dir, "coverage.csv"), benchmarkCsv());
    const out = join(dir, "out");
    expect(main(["--in", dir, "--out", out])).toBe(0);
    expect(readdirSync(out).sort()).toEqual(["coverage_lower.svg", "coverage_upper.svg", "width.svg"]);
  });
});
