/**
 * The three figure kinds over the toolkit's CSV contracts:
 *
 * - `ratios`: d'Alembert ratio curves vs n, one per series;
 * - `exponents`: singular-exponent curves vs n with optional asymptote
 *   guide lines taken from the artifact config;
 * - `polemap`: complex-plane scatter of Pade poles (marker per class) and
 *   numerator zeros.
 *
 * No science happens here: every number is read from the input file.
 */

import {
  CsvTable,
  column,
  numericColumn,
  parseCsv,
  requireColumns,
} from './csv.js';
import {
  Figure,
  HEIGHT,
  MARGIN,
  PALETTE,
  WIDTH,
  extent,
  linearScale,
} from './figure.js';

export type FigureKind = 'ratios' | 'exponents' | 'polemap';

const SERIES_LABELS: Record<string, string> = {
  x_plus: 'x₊',
  x_minus: 'x₋',
  z: 'z',
  lam: 'λ',
};

function groupBySeries(table: CsvTable): Map<string, number[]> {
  const series = column(table, 'series');
  const out = new Map<string, number[]>();
  series.forEach((name, i) => {
    if (!out.has(name)) out.set(name, []);
    out.get(name)!.push(i);
  });
  return out;
}

function curveFigure(
  table: CsvTable,
  valueColumn: string,
  title: string,
  yLabel: string,
  guides: number[],
): string {
  const ns = numericColumn(table, 'n');
  const values = numericColumn(table, valueColumn);
  const groups = groupBySeries(table);
  const xScale = linearScale(extent(ns, 0.02), [MARGIN.left, WIDTH - MARGIN.right]);
  const yScale = linearScale(
    extent(values.concat(guides), 0.08),
    [HEIGHT - MARGIN.bottom, MARGIN.top],
  );
  const fig = new Figure(xScale, yScale, title, 'n', yLabel);
  fig.axes();
  for (const g of guides) fig.guideLine(g);
  let idx = 0;
  for (const [name, rows] of groups) {
    const color = PALETTE[idx % PALETTE.length];
    idx += 1;
    fig.polyline(
      rows.map((i) => ns[i]),
      rows.map((i) => values[i]),
      color,
      SERIES_LABELS[name] ?? name,
    );
  }
  return fig.render();
}

export function renderRatios(table: CsvTable): string {
  requireColumns(table, ['series', 'n', 'ratio']);
  return curveFigure(table, 'ratio', 'Coefficient ratio test', '|a(n+1)/a(n)|', []);
}

export function renderExponents(table: CsvTable): string {
  requireColumns(table, ['series', 'n', 'exponent']);
  const guides = readGuides(table);
  return curveFigure(
    table,
    'exponent',
    'Singularity exponents',
    'exponent at nearest singularity',
    guides,
  );
}

function readGuides(table: CsvTable): number[] {
  const cfg = table.config as { config?: { guides?: unknown } } | null;
  const guides = cfg?.config?.guides;
  if (Array.isArray(guides)) {
    return guides.filter((v): v is number => typeof v === 'number');
  }
  return [];
}

export function renderPolemap(table: CsvTable): string {
  requireColumns(table, ['re_pole', 'im_pole', 're_residue', 'im_residue', 'class']);
  const re = numericColumn(table, 're_pole');
  const im = numericColumn(table, 'im_pole');
  const cls = column(table, 'class');
  // equal aspect: share one span across both axes
  const reExt = extent(re, 0.08);
  const imExt = extent(im, 0.08);
  const mid = (e: [number, number]) => (e[0] + e[1]) / 2;
  const span = Math.max(reExt[1] - reExt[0], imExt[1] - imExt[0]) / 2;
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const aspect = plotW / plotH;
  const xScale = linearScale(
    [mid(reExt) - span * aspect, mid(reExt) + span * aspect],
    [MARGIN.left, WIDTH - MARGIN.right],
  );
  const yScale = linearScale(
    [mid(imExt) - span, mid(imExt) + span],
    [HEIGHT - MARGIN.bottom, MARGIN.top],
  );
  const fig = new Figure(xScale, yScale, 'Pade poles and zeros', 'Re z', 'Im z');
  fig.axes();
  const style: Record<string, [string, string]> = {
    true_branch_point: ['circle', '#d62728'],
    froissart_artifact: ['cross', '#1f77b4'],
    unclassified: ['open-circle', '#7f7f7f'],
    zero: ['dot', '#2ca02c'],
  };
  const seen = new Set<string>();
  const counts = new Map<string, number>();
  for (let i = 0; i < re.length; i++) {
    const [marker, color] = style[cls[i]] ?? ['open-circle', '#7f7f7f'];
    fig.marker(re[i], im[i], marker, color, `marker-${cls[i]}`);
    counts.set(cls[i], (counts.get(cls[i]) ?? 0) + 1);
    seen.add(cls[i]);
  }
  for (const name of ['true_branch_point', 'froissart_artifact', 'unclassified', 'zero']) {
    if (seen.has(name)) {
      const [marker, color] = style[name];
      fig.legendMarker(`${name} (${counts.get(name)})`, color, marker);
    }
  }
  return fig.render();
}

export function render(kind: FigureKind, csvText: string): string {
  const table = parseCsv(csvText);
  switch (kind) {
    case 'ratios':
      return renderRatios(table);
    case 'exponents':
      return renderExponents(table);
    case 'polemap':
      return renderPolemap(table);
    default:
      throw new Error(`unknown figure kind: ${kind as string}`);
  }
}
