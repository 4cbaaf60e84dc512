/**
 * Minimal deterministic SVG chart renderer: linear axes, polyline and bar
 * series, vertical reference lines, legend. No DOM, no timestamps, fixed
 * styling, so identical inputs produce byte-identical markup.
 */

export interface Series {
  label: string;
  color: string;
  dash?: string;
  kind?: "line" | "bars";
  barWidth?: number; // data units, bars only
  points: Array<[number, number]>;
}

export interface VLine {
  x: number;
  label: string;
}

export interface Panel {
  title?: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  vlines?: VLine[];
  yDomain?: [number, number];
}

const PANEL_W = 460;
const PANEL_H = 360;
const MARGIN = { left: 64, right: 18, top: 30, bottom: 48 };
const FONT = "font-family=\"Helvetica, Arial, sans-serif\"";

function fmt(x: number): string {
  return x.toFixed(2).replace(/\.00$/, "").replace(/(\.\d)0$/, "$1");
}

/** Round-valued ticks covering [lo, hi] with a 1-2-5 step. */
export function niceTicks(lo: number, hi: number, target = 6): number[] {
  if (!(hi > lo)) {
    hi = lo + 1;
    lo -= 1;
  }
  const raw = (hi - lo) / target;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const r = raw / mag;
  const step = mag * (r <= 1 ? 1 : r <= 2 ? 2 : r <= 5 ? 5 : 10);
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
    ticks.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  return ticks;
}

function tickLabel(t: number, step: number): string {
  const decimals = Math.max(0, -Math.floor(Math.log10(step) + 1e-9));
  return t.toFixed(Math.min(decimals, 6));
}

interface Scale {
  (x: number): number;
}

function linear(d0: number, d1: number, r0: number, r1: number): Scale {
  const k = (r1 - r0) / (d1 - d0);
  return (x) => r0 + (x - d0) * k;
}

function extent(panel: Panel): { x: [number, number]; y: [number, number] } {
  let xMin = Infinity, xMax = -Infinity, yMin = Infinity, yMax = -Infinity;
  for (const s of panel.series) {
    const half = s.kind === "bars" ? (s.barWidth ?? 1) / 2 : 0;
    for (const [x, y] of s.points) {
      xMin = Math.min(xMin, x - half);
      xMax = Math.max(xMax, x + half);
      yMin = Math.min(yMin, y);
      yMax = Math.max(yMax, y);
    }
  }
  for (const v of panel.vlines ?? []) {
    xMin = Math.min(xMin, v.x);
    xMax = Math.max(xMax, v.x);
  }
  if (panel.yDomain) [yMin, yMax] = panel.yDomain;
  else {
    yMin = Math.min(yMin, 0);
    yMax = yMax + (yMax - yMin) * 0.05;
  }
  if (xMax === xMin) {
    xMin -= 1;
    xMax += 1;
  }
  return { x: [xMin, xMax], y: [yMin, yMax] };
}

function renderPanel(panel: Panel, x0: number): string {
  const { x: xd, y: yd } = extent(panel);
  const left = x0 + MARGIN.left;
  const right = x0 + PANEL_W - MARGIN.right;
  const top = MARGIN.top;
  const bottom = PANEL_H - MARGIN.bottom;
  const sx = linear(xd[0], xd[1], left, right);
  const sy = linear(yd[0], yd[1], bottom, top);
  const out: string[] = [];

  const xTicks = niceTicks(xd[0], xd[1]);
  const yTicks = niceTicks(yd[0], yd[1]);
  const xStep = xTicks.length > 1 ? xTicks[1] - xTicks[0] : 1;
  const yStep = yTicks.length > 1 ? yTicks[1] - yTicks[0] : 1;

  out.push(`<g class="grid" stroke="#dddddd" stroke-width="0.5">`);
  for (const t of yTicks) {
    out.push(`<line x1="${fmt(left)}" y1="${fmt(sy(t))}" x2="${fmt(right)}" y2="${fmt(sy(t))}"/>`);
  }
  out.push(`</g>`);

  out.push(`<g class="axes" stroke="#333333" stroke-width="1" fill="none">`);
  out.push(`<line x1="${fmt(left)}" y1="${fmt(bottom)}" x2="${fmt(right)}" y2="${fmt(bottom)}"/>`);
  out.push(`<line x1="${fmt(left)}" y1="${fmt(top)}" x2="${fmt(left)}" y2="${fmt(bottom)}"/>`);
  for (const t of xTicks) {
    out.push(`<line x1="${fmt(sx(t))}" y1="${fmt(bottom)}" x2="${fmt(sx(t))}" y2="${fmt(bottom + 5)}"/>`);
  }
  for (const t of yTicks) {
    out.push(`<line x1="${fmt(left - 5)}" y1="${fmt(sy(t))}" x2="${fmt(left)}" y2="${fmt(sy(t))}"/>`);
  }
  out.push(`</g>`);

  out.push(`<g class="tick-labels" ${FONT} font-size="11" fill="#333333">`);
  for (const t of xTicks) {
    out.push(`<text x="${fmt(sx(t))}" y="${fmt(bottom + 18)}" text-anchor="middle">${tickLabel(t, xStep)}</text>`);
  }
  for (const t of yTicks) {
    out.push(`<text x="${fmt(left - 9)}" y="${fmt(sy(t) + 3.5)}" text-anchor="end">${tickLabel(t, yStep)}</text>`);
  }
  out.push(`</g>`);

  const cx = (left + right) / 2;
  out.push(`<g class="axis-labels" ${FONT} font-size="12" fill="#111111">`);
  out.push(`<text x="${fmt(cx)}" y="${fmt(PANEL_H - 10)}" text-anchor="middle">${panel.xLabel}</text>`);
  out.push(`<text x="${fmt(x0 + 15)}" y="${fmt((top + bottom) / 2)}" text-anchor="middle" ` +
           `transform="rotate(-90 ${fmt(x0 + 15)} ${fmt((top + bottom) / 2)})">${panel.yLabel}</text>`);
  if (panel.title) {
    out.push(`<text x="${fmt(cx)}" y="${fmt(top - 10)}" text-anchor="middle" font-size="13">${panel.title}</text>`);
  }
  out.push(`</g>`);

  for (const s of panel.series) {
    if (s.kind === "bars") {
      const half = (s.barWidth ?? 1) / 2;
      out.push(`<g class="series" fill="${s.color}" fill-opacity="0.75">`);
      for (const [x, y] of s.points) {
        const bx = sx(x - half);
        const bw = sx(x + half) - bx;
        out.push(`<rect x="${fmt(bx)}" y="${fmt(sy(y))}" width="${fmt(bw)}" ` +
                 `height="${fmt(sy(yd[0]) - sy(y))}"/>`);
      }
      out.push(`</g>`);
    } else {
      const pts = s.points.map(([x, y]) => `${fmt(sx(x))},${fmt(sy(y))}`).join(" ");
      const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
      out.push(`<polyline class="series" fill="none" stroke="${s.color}" stroke-width="1.8"${dash} points="${pts}"/>`);
    }
  }

  for (const v of panel.vlines ?? []) {
    out.push(`<g class="noise-floor" stroke="#555555" stroke-width="1.2" stroke-dasharray="3 3">`);
    out.push(`<line x1="${fmt(sx(v.x))}" y1="${fmt(top)}" x2="${fmt(sx(v.x))}" y2="${fmt(bottom)}"/>`);
    out.push(`</g>`);
    out.push(`<text class="noise-floor-label" ${FONT} font-size="11" fill="#555555" ` +
             `x="${fmt(sx(v.x) + 4)}" y="${fmt(top + 12)}">${v.label}</text>`);
  }

  const entries = panel.series.map((s, i) => ({ s, i }));
  const lw = 132;
  const lx = right - lw;
  out.push(`<g class="legend" ${FONT} font-size="11">`);
  for (const { s, i } of entries) {
    const ly = top + 10 + i * 16;
    if (s.kind === "bars") {
      out.push(`<rect x="${fmt(lx)}" y="${fmt(ly - 5)}" width="18" height="8" fill="${s.color}" fill-opacity="0.75"/>`);
    } else {
      const dash = s.dash ? ` stroke-dasharray="${s.dash}"` : "";
      out.push(`<line x1="${fmt(lx)}" y1="${fmt(ly)}" x2="${fmt(lx + 18)}" y2="${fmt(ly)}" ` +
               `stroke="${s.color}" stroke-width="1.8"${dash}/>`);
    }
    out.push(`<text x="${fmt(lx + 24)}" y="${fmt(ly + 3.5)}" fill="#111111">${s.label}</text>`);
  }
  out.push(`</g>`);
  return out.join("\n");
}

/** Render one or more side-by-side panels into a standalone SVG document. */
export function renderSvg(panels: Panel[]): string {
  const width = PANEL_W * panels.length;
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${PANEL_H}" ` +
      `width="${width}" height="${PANEL_H}">`,
    `<rect width="${width}" height="${PANEL_H}" fill="#ffffff"/>`,
  ];
  panels.forEach((panel, i) => {
    parts.push(renderPanel(panel, i * PANEL_W));
  });
  parts.push(`</svg>`);
  return parts.join("\n") + "\n";
}
