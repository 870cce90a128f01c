/** Deterministic SVG panel rendering: no dates, no randomness, fixed
 * styling, numbers formatted to fixed precision, so byte-identical output
 * for identical inputs. */

export interface Series {
  label: string;
  // points in data coordinates, with symmetric error bars
  points: { x: number; y: number; err: number }[];
}

export interface PanelSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  diagonal: boolean; // y = x reference (coverage panels)
  yDomain?: [number, number];
}

const WIDTH = 560;
const HEIGHT = 420;
const MARGIN = { top: 42, right: 24, bottom: 52, left: 64 };
const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];

const fmt = (v: number): string => v.toFixed(2).replace(/-0\.00/, "0.00");
const px = (v: number): string => v.toFixed(2);

function niceTicks(lo: number, hi: number, count: number): number[] {
  const span = hi - lo || 1;
  const rawStep = span / Math.max(count - 1, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((s) => span / s <= count) ?? candidates[candidates.length - 1];
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let t = first; t <= hi + 1e-12; t += step) {
    ticks.push(Number(t.toFixed(10)));
  }
  return ticks;
}

export function renderPanel(spec: PanelSpec): string {
  const xs = spec.series.flatMap((s) => s.points.map((p) => p.x));
  const ys = spec.series.flatMap((s) => s.points.flatMap((p) => [p.y - p.err, p.y + p.err]));
  const x0 = Math.min(...xs);
  const x1 = Math.max(...xs);
  let [y0, y1] = spec.yDomain ?? [Math.min(...ys), Math.max(...ys)];
  if (spec.diagonal) {
    y0 = Math.min(y0, x0);
    y1 = Math.max(y1, x1);
  }
  const yPad = 0.04 * (y1 - y0 || 1);
  y0 -= yPad;
  y1 += yPad;
  const xPad = 0.04 * (x1 - x0 || 1);
  const xLo = x0 - xPad;
  const xHi = x1 + xPad;

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (v: number) => MARGIN.left + ((v - xLo) / (xHi - xLo)) * plotW;
  const sy = (v: number) => MARGIN.top + plotH - ((v - y0) / (y1 - y0)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="15" font-weight="bold">${spec.title}</text>`,
  );

  // axes, ticks, grid
  const axisColor = "#333333";
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top + plotH}" x2="${MARGIN.left + plotW}" y2="${MARGIN.top + plotH}" stroke="${axisColor}"/>`,
  );
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${MARGIN.top + plotH}" stroke="${axisColor}"/>`,
  );
  for (const t of niceTicks(xLo, xHi, 8)) {
    const X = sx(t);
    parts.push(`<line x1="${px(X)}" y1="${MARGIN.top + plotH}" x2="${px(X)}" y2="${MARGIN.top + plotH + 5}" stroke="${axisColor}"/>`);
    parts.push(
      `<text x="${px(X)}" y="${MARGIN.top + plotH + 20}" text-anchor="middle" font-size="11">${fmt(t)}</text>`,
    );
  }
  for (const t of niceTicks(y0, y1, 8)) {
    const Y = sy(t);
    parts.push(`<line x1="${MARGIN.left - 5}" y1="${px(Y)}" x2="${MARGIN.left}" y2="${px(Y)}" stroke="${axisColor}"/>`);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${px(Y)}" x2="${MARGIN.left + plotW}" y2="${px(Y)}" stroke="#dddddd" stroke-width="0.5"/>`,
    );
    parts.push(
      `<text x="${MARGIN.left - 9}" y="${px(Y + 4)}" text-anchor="end" font-size="11">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-size="12">${spec.xLabel}</text>`,
  );
  parts.push(
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${spec.yLabel}</text>`,
  );

  if (spec.diagonal) {
    const lo = Math.max(xLo, y0);
    const hi = Math.min(xHi, y1);
    parts.push(
      `<line x1="${px(sx(lo))}" y1="${px(sy(lo))}" x2="${px(sx(hi))}" y2="${px(sy(hi))}" ` +
        `stroke="#888888" stroke-dasharray="5,4" stroke-width="1"/>`,
    );
  }

  spec.series.forEach((series, idx) => {
    const color = PALETTE[idx % PALETTE.length];
    const path = series.points
      .map((p, i) => `${i === 0 ? "M" : "L"}${px(sx(p.x))},${px(sy(p.y))}`)
      .join(" ");
    parts.push(`<path d="${path}" fill="none" stroke="${color}" stroke-width="1.6"/>`);
    for (const p of series.points) {
      const X = sx(p.x);
      if (p.err > 0) {
        parts.push(
          `<line x1="${px(X)}" y1="${px(sy(p.y - p.err))}" x2="${px(X)}" y2="${px(sy(p.y + p.err))}" stroke="${color}" stroke-width="1"/>`,
        );
        for (const end of [p.y - p.err, p.y + p.err]) {
          parts.push(
            `<line x1="${px(X - 3)}" y1="${px(sy(end))}" x2="${px(X + 3)}" y2="${px(sy(end))}" stroke="${color}" stroke-width="1"/>`,
          );
        }
      }
      parts.push(`<circle cx="${px(X)}" cy="${px(sy(p.y))}" r="3" fill="${color}"/>`);
    }
    // legend entry
    const ly = MARGIN.top + 8 + idx * 16;
    const lx = MARGIN.left + 10;
    parts.push(`<line x1="${lx}" y1="${ly}" x2="${lx + 18}" y2="${ly}" stroke="${color}" stroke-width="2"/>`);
    parts.push(`<text x="${lx + 24}" y="${ly + 4}" font-size="11">${series.label}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
