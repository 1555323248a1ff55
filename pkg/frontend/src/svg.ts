/**
 * Minimal hand-rolled SVG line charts.
 *
 * No chart library: the figures are a few polylines, ticks and labels, and
 * writing the markup directly keeps the output byte-deterministic, which
 * the tests rely on (same input -> same figure).
 */

export interface Series {
  label: string;
  color: string;
  values: number[];
  dash?: string;
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  x: number[];
  series: Series[];
  logY?: boolean;
}

/** Floor for log-scale plots so exact zeros stay drawable. */
export const LOG_FLOOR = 1e-20;

const W = 720;
const H = 360;
const ML = 70;
const MR = 20;
const MT = 40;
const MB = 52;
const PW = W - ML - MR;
const PH = H - MT - MB;

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return String(Number(v.toPrecision(4)));
}

function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const ticks: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

export function buildChart(o: ChartOptions): string {
  const { x, series, logY = false } = o;
  if (series.some((s) => s.values.length !== x.length)) {
    throw new Error("series length does not match the time axis");
  }

  const xMin = Math.min(...x);
  const xMax = Math.max(...x);
  const xOf = (v: number) => ML + ((v - xMin) / (xMax - xMin || 1)) * PW;

  const tf = logY
    ? (v: number) => Math.log10(Math.max(v, LOG_FLOOR))
    : (v: number) => v;
  const all = series.flatMap((s) => s.values.map(tf));
  let yMin = Math.min(...all);
  let yMax = Math.max(...all);
  if (yMax === yMin) {
    // flat data: open a symmetric band so the line sits mid-plot
    const pad = logY ? 1 : Math.abs(yMin) * 0.5 || 1;
    yMin -= pad;
    yMax += pad;
  }
  const yOf = (v: number) => MT + PH - ((tf(v) - yMin) / (yMax - yMin)) * PH;

  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${W}" height="${H}" fill="#fff"/>\n`;
  s += `<text x="${ML}" y="22" font-size="13" font-weight="600" fill="#222">${esc(o.title)}</text>\n`;

  // horizontal grid and y tick labels
  if (logY) {
    const lo = Math.ceil(yMin);
    const hi = Math.floor(yMax);
    for (let e = lo; e <= hi; e++) {
      const y = MT + PH - ((e - yMin) / (yMax - yMin)) * PH;
      s += `<line x1="${ML}" y1="${y.toFixed(1)}" x2="${ML + PW}" y2="${y.toFixed(1)}" stroke="#eee" stroke-width="0.6"/>\n`;
      s += `<text x="${ML - 6}" y="${(y + 3).toFixed(1)}" font-size="9" fill="#555" text-anchor="end">1e${e}</text>\n`;
    }
  } else {
    for (const v of niceTicks(yMin, yMax, 5)) {
      const y = MT + PH - ((v - yMin) / (yMax - yMin)) * PH;
      s += `<line x1="${ML}" y1="${y.toFixed(1)}" x2="${ML + PW}" y2="${y.toFixed(1)}" stroke="#eee" stroke-width="0.6"/>\n`;
      s += `<text x="${ML - 6}" y="${(y + 3).toFixed(1)}" font-size="9" fill="#555" text-anchor="end">${fmt(v)}</text>\n`;
    }
  }

  // x ticks
  for (const v of niceTicks(xMin, xMax, 6)) {
    const px = xOf(v);
    s += `<line x1="${px.toFixed(1)}" y1="${MT + PH}" x2="${px.toFixed(1)}" y2="${MT + PH + 4}" stroke="#333" stroke-width="0.7"/>\n`;
    s += `<text x="${px.toFixed(1)}" y="${MT + PH + 16}" font-size="9" fill="#555" text-anchor="middle">${fmt(v)}</text>\n`;
  }

  // series
  for (const sr of series) {
    const pts = x
      .map((xv, i) => `${xOf(xv).toFixed(1)},${yOf(sr.values[i]).toFixed(1)}`)
      .join(" ");
    const dash = sr.dash ? ` stroke-dasharray="${sr.dash}"` : "";
    s += `<polyline data-label="${esc(sr.label)}" fill="none" stroke="${sr.color}" stroke-width="1.4"${dash} points="${pts}"/>\n`;
  }

  // frame and axis labels
  s += `<line x1="${ML}" y1="${MT}" x2="${ML}" y2="${MT + PH}" stroke="#333" stroke-width="0.8"/>\n`;
  s += `<line x1="${ML}" y1="${MT + PH}" x2="${ML + PW}" y2="${MT + PH}" stroke="#333" stroke-width="0.8"/>\n`;
  s += `<text x="${ML + PW / 2}" y="${H - 14}" font-size="11" fill="#222" text-anchor="middle">${esc(o.xLabel)}</text>\n`;
  s += `<text x="16" y="${MT + PH / 2}" font-size="11" fill="#222" text-anchor="middle" transform="rotate(-90 16 ${MT + PH / 2})">${esc(o.yLabel)}</text>\n`;

  // legend, top right inside the plot
  let ly = MT + 12;
  for (const sr of series) {
    const lx = ML + PW - 230;
    const dash = sr.dash ? ` stroke-dasharray="${sr.dash}"` : "";
    s += `<line x1="${lx}" y1="${ly - 3}" x2="${lx + 22}" y2="${ly - 3}" stroke="${sr.color}" stroke-width="1.4"${dash}/>\n`;
    s += `<text x="${lx + 28}" y="${ly}" font-size="9.5" fill="#333">${esc(sr.label)}</text>\n`;
    ly += 14;
  }

  s += `</svg>\n`;
  return s;
}
