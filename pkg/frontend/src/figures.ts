/** Batch regeneration of the three-panel coverage/width layout from a
 * harness coverage.csv: lower-tail coverage, upper-tail coverage (both vs
 * the nominal level, with +/-1 SE bars and a diagonal reference) and
 * two-sided interval width. Pure post-processing; inputs are read-only and
 * identical inputs produce byte-identical SVG. */

import { readFileSync, writeFileSync, mkdirSync } from "fs";
import { join } from "path";

import { CoverageRow, alphasOf, methodsOf, parseCoverageCsv } from "./csv.js";
import { Series, renderPanel } from "./svg.js";

export interface FigureResult {
  written: string[];
  warnings: string[];
}

function seriesFor(
  rows: CoverageRow[],
  methods: string[],
  alphas: number[],
  tail: string,
  value: (r: CoverageRow) => number,
  err: (r: CoverageRow) => number,
): Series[] {
  const series: Series[] = [];
  for (const method of methods) {
    const points: Series["points"] = [];
    for (const alpha of alphas) {
      const row = rows.find((r) => r.method === method && r.tail === tail && r.alpha === alpha);
      if (row !== undefined) {
        points.push({ x: 1 - alpha, y: value(row), err: err(row) });
      }
    }
    points.sort((a, b) => a.x - b.x);
    if (points.length > 0) {
      series.push({ label: method, points });
    }
  }
  return series;
}

export function renderFigures(csvText: string): { name: string; svg: string }[] {
  const rows = parseCoverageCsv(csvText);
  const methods = methodsOf(rows);
  if (methods.length === 0) {
    return [];
  }
  const alphas = alphasOf(rows);
  const scenario = rows[0].scenario;
  const out: { name: string; svg: string }[] = [];

  for (const tail of ["lower", "upper"] as const) {
    const series = seriesFor(rows, methods, alphas, tail,
      (r) => r.coverage, (r) => r.coverage_se);
    if (series.length === 0) continue;
    out.push({
      name: `coverage_${tail}.svg`,
      svg: renderPanel({
        title: `${scenario}: ${tail}-tail coverage of one-sided intervals`,
        xLabel: "nominal level 1 - alpha",
        yLabel: "empirical coverage",
        series,
        diagonal: true,
      }),
    });
  }

  const widthSeries = seriesFor(rows, methods, alphas, "two-sided",
    (r) => r.mean_width, (r) => r.width_se);
  if (widthSeries.length > 0) {
    const maxW = Math.max(...widthSeries.flatMap((s) => s.points.map((p) => p.y + p.err)));
    out.push({
      name: "width.svg",
      svg: renderPanel({
        title: `${scenario}: width of two-sided intervals`,
        xLabel: "nominal level 1 - alpha",
        yLabel: "mean interval width",
        series: widthSeries,
        diagonal: false,
        yDomain: [0, maxW],
      }),
    });
  }
  return out;
}

export function generateFigures(inDir: string, outDir: string): FigureResult {
  const csvPath = join(inDir, "coverage.csv");
  const text = readFileSync(csvPath, "utf8");
  const figures = renderFigures(text);
  const warnings: string[] = [];
  if (figures.length === 0) {
    warnings.push(`no methods found in ${csvPath}; nothing to draw`);
    return { written: [], warnings };
  }
  mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  for (const fig of figures) {
    const path = join(outDir, fig.name);
    writeFileSync(path, fig.svg, "utf8");
    written.push(path);
  }
  return { written, warnings };
}
