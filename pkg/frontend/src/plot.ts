/**
 * Deterministic log-log SVG plots of convergence data.
 *
 * One panel per value of the optional facet column (the small-step studies
 * facet on the initialization mode); within a panel, one series per value
 * of the group column, plus dashed reference-slope guides anchored at the
 * first data point of each series.
 */
import { CsvTable, requireColumns } from "./csv.js";

export interface PlotSpec {
  x: string;
  y: string[];
  group?: string;
  panel?: string;
  slopes: number[];
  width?: number;
  height?: number;
}

interface Point {
  x: number;
  y: number;
}

interface Series {
  label: string;
  points: Point[];
}

interface Panel {
  title: string;
  series: Series[];
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

const esc = (s: string): string =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");

/** High-precision coordinate format so guide/series slopes survive extraction. */
const fmt = (v: number): string => v.toFixed(12);

function compareValues(a: string, b: string): number {
  const na = Number(a);
  const nb = Number(b);
  if (Number.isFinite(na) && Number.isFinite(nb)) return na - nb;
  return a < b ? -1 : a > b ? 1 : 0;
}

function collectPanels(table: CsvTable, spec: PlotSpec): Panel[] {
  requireColumns(table, [spec.x, ...spec.y]);
  if (spec.group) requireColumns(table, [spec.group]);
  if (spec.panel) requireColumns(table, [spec.panel]);

  const panelKeys = spec.panel
    ? [...new Set(table.rows.map((r) => r[spec.panel!]))].sort(compareValues)
    : [""];

  const panels: Panel[] = [];
  for (const pk of panelKeys) {
    const inPanel = spec.panel ? table.rows.filter((r) => r[spec.panel!] === pk) : table.rows;
    const groupKeys = spec.group
      ? [...new Set(inPanel.map((r) => r[spec.group!]))].sort(compareValues)
      : [""];
    const series: Series[] = [];
    for (const gk of groupKeys) {
      const inGroup = spec.group ? inPanel.filter((r) => r[spec.group!] === gk) : inPanel;
      for (const ycol of spec.y) {
        const pts = inGroup
          .filter((r) => r[ycol] !== "" && r[spec.x] !== "")
          .map((r) => ({ x: Number(r[spec.x]), y: Number(r[ycol]) }))
          .filter((p) => Number.isFinite(p.x) && Number.isFinite(p.y) && p.x > 0 && p.y > 0);
        pts.sort((a, b) => b.x - a.x);
        const parts: string[] = [];
        if (spec.group) parts.push(`${spec.group}=${gk}`);
        if (spec.y.length > 1 || !spec.group) parts.push(ycol);
        series.push({ label: parts.join(" "), points: pts });
      }
    }
    const nonEmpty = series.filter((s) => s.points.length >= 2);
    if (nonEmpty.length === 0) {
      throw new Error(
        spec.panel ? `panel ${spec.panel}=${pk}: no group has two data points` : "no group has two data points",
      );
    }
    panels.push({ title: spec.panel ? `${spec.panel}=${pk}` : "", series: nonEmpty });
  }
  return panels;
}

function decadeTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(lo); e <= Math.floor(hi); e++) ticks.push(e);
  if (ticks.length === 0) ticks.push(lo, hi);
  return ticks;
}

function renderPanel(
  panel: Panel,
  spec: PlotSpec,
  x0: number,
  width: number,
  height: number,
  slopes: number[],
): string {
  const mt = 28;
  const mb = 42;
  const ml = 64;
  const mr = 14;
  const pw = width - ml - mr;
  const ph = height - mt - mb;

  const xs = panel.series.flatMap((s) => s.points.map((p) => Math.log10(p.x)));
  const ys = panel.series.flatMap((s) => s.points.map((p) => Math.log10(p.y)));
  // include guide extents so they stay inside the axes
  for (const s of panel.series) {
    const first = s.points[0];
    const lastX = s.points[s.points.length - 1].x;
    for (const m of slopes) {
      ys.push(Math.log10(first.y) + m * (Math.log10(lastX) - Math.log10(first.x)));
    }
  }
  const xlo = Math.min(...xs);
  const xhi = Math.max(...xs);
  const ylo = Math.min(...ys);
  const yhi = Math.max(...ys);
  const padX = (xhi - xlo || 1) * 0.05;
  const padY = (yhi - ylo || 1) * 0.08;

  const sx = (lx: number): number => x0 + ml + ((lx - xlo + padX) / (xhi - xlo + 2 * padX)) * pw;
  const sy = (ly: number): number => mt + ph - ((ly - ylo + padY) / (yhi - ylo + 2 * padY)) * ph;

  let out = "";
  out += `<rect x="${(x0 + ml).toFixed(2)}" y="${mt.toFixed(2)}" width="${pw.toFixed(2)}" height="${ph.toFixed(2)}" fill="none" stroke="#444" stroke-width="1"/>\n`;
  if (panel.title) {
    out += `<text x="${(x0 + ml + pw / 2).toFixed(2)}" y="${(mt - 10).toFixed(2)}" text-anchor="middle" font-size="13" fill="#222">${esc(panel.title)}</text>\n`;
  }

  for (const e of decadeTicks(xlo - padX, xhi + padX)) {
    const px = sx(e);
    out += `<line x1="${px.toFixed(2)}" y1="${mt}" x2="${px.toFixed(2)}" y2="${mt + ph}" stroke="#ddd" stroke-width="0.5"/>\n`;
    out += `<text x="${px.toFixed(2)}" y="${(mt + ph + 16).toFixed(2)}" text-anchor="middle" font-size="11" fill="#555">1e${e}</text>\n`;
  }
  for (const e of decadeTicks(ylo - padY, yhi + padY)) {
    const py = sy(e);
    out += `<line x1="${(x0 + ml).toFixed(2)}" y1="${py.toFixed(2)}" x2="${(x0 + ml + pw).toFixed(2)}" y2="${py.toFixed(2)}" stroke="#ddd" stroke-width="0.5"/>\n`;
    out += `<text x="${(x0 + ml - 6).toFixed(2)}" y="${(py + 4).toFixed(2)}" text-anchor="end" font-size="11" fill="#555">1e${e}</text>\n`;
  }
  out += `<text x="${(x0 + ml + pw / 2).toFixed(2)}" y="${(mt + ph + 34).toFixed(2)}" text-anchor="middle" font-size="12" fill="#222">${esc(spec.x)}</text>\n`;

  panel.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = s.points.map((p) => `${fmt(sx(Math.log10(p.x)))},${fmt(sy(Math.log10(p.y)))}`).join(" ");
    out += `<polyline class="series" fill="none" stroke="${color}" stroke-width="1.5" points="${pts}"/>\n`;
    for (const p of s.points) {
      out += `<circle cx="${fmt(sx(Math.log10(p.x)))}" cy="${fmt(sy(Math.log10(p.y)))}" r="3" fill="${color}"/>\n`;
    }
    // dashed reference guides anchored at the first (largest-x) data point
    const first = s.points[0];
    const last = s.points[s.points.length - 1];
    for (const m of slopes) {
      const lx0 = Math.log10(first.x);
      const lx1 = Math.log10(last.x);
      const ly0 = Math.log10(first.y);
      const ly1 = ly0 + m * (lx1 - lx0);
      out += `<line class="guide" x1="${fmt(sx(lx0))}" y1="${fmt(sy(ly0))}" x2="${fmt(sx(lx1))}" y2="${fmt(sy(ly1))}" stroke="#777" stroke-width="1" stroke-dasharray="6,4"/>\n`;
    }
  });

  // legend
  let ly = mt + 14;
  panel.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    out += `<line x1="${(x0 + ml + 10).toFixed(2)}" y1="${ly.toFixed(2)}" x2="${(x0 + ml + 30).toFixed(2)}" y2="${ly.toFixed(2)}" stroke="${color}" stroke-width="2"/>\n`;
    out += `<text x="${(x0 + ml + 36).toFixed(2)}" y="${(ly + 4).toFixed(2)}" font-size="11" fill="#222">${esc(s.label)}</text>\n`;
    ly += 15;
  });
  for (const m of slopes) {
    out += `<line x1="${(x0 + ml + 10).toFixed(2)}" y1="${ly.toFixed(2)}" x2="${(x0 + ml + 30).toFixed(2)}" y2="${ly.toFixed(2)}" stroke="#777" stroke-width="1" stroke-dasharray="6,4"/>\n`;
    out += `<text x="${(x0 + ml + 36).toFixed(2)}" y="${(ly + 4).toFixed(2)}" font-size="11" fill="#222">slope ${m}</text>\n`;
    ly += 15;
  }
  return out;
}

export function renderSvg(table: CsvTable, spec: PlotSpec): string {
  const panels = collectPanels(table, spec);
  const panelWidth = spec.width ?? 520;
  const height = spec.height ?? 400;
  const total = panelWidth * panels.length;

  let svg = `<svg xmlns="http://www.w3.org/2000/svg" width="${total}" height="${height}" viewBox="0 0 ${total} ${height}" font-family="Helvetica, Arial, sans-serif">\n`;
  svg += `<rect width="${total}" height="${height}" fill="white"/>\n`;
  panels.forEach((panel, i) => {
    svg += renderPanel(panel, spec, i * panelWidth, panelWidth, height, spec.slopes);
  });
  svg += `</svg>\n`;
  return svg;
}
