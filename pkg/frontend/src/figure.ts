/**
 * Minimal deterministic SVG scene builder: linear scales, axes with ticks,
 * polylines, scatter markers and a legend.  No DOM, no randomness, no
 * timestamps, so re-rendering an input byte-identically reproduces the
 * figure.
 */

export const WIDTH = 860;
export const HEIGHT = 620;
export const MARGIN = { left: 70, right: 190, top: 40, bottom: 55 };

export const PALETTE = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#8c564b', '#e377c2'];

export interface Scale {
  (v: number): number;
  domain: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  let [d0, d1] = domain;
  if (d0 === d1) {
    d0 -= 1;
    d1 += 1;
  }
  const f = ((v: number) => range[0] + ((v - d0) / (d1 - d0)) * (range[1] - range[0])) as Scale;
  f.domain = [d0, d1];
  return f;
}

export function extent(values: number[], pad = 0.05): [number, number] {
  const finite = values.filter((v) => Number.isFinite(v));
  if (finite.length === 0) return [0, 1];
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  const span = hi - lo || 1;
  return [lo - pad * span, hi + pad * span];
}

export function ticks(domain: [number, number], count = 6): number[] {
  const span = domain[1] - domain[0];
  const rawStep = span / count;
  const mag = 10 ** Math.floor(Math.log10(rawStep));
  const norm = rawStep / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const start = Math.ceil(domain[0] / step) * step;
  const out: number[] = [];
  for (let v = start; v <= domain[1] + 1e-12 * Math.abs(step); v += step) {
    out.push(Math.abs(v) < 1e-12 * Math.abs(step) ? 0 : v);
  }
  return out;
}

function fmt(v: number): string {
  if (!Number.isFinite(v)) return 'nan';
  const rounded = Math.round(v * 1e12) / 1e12;
  return String(rounded);
}

const esc = (s: string) =>
  s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');

export class Figure {
  private parts: string[] = [];
  private legendEntries: { label: string; color: string; marker?: string }[] = [];

  constructor(
    readonly x: Scale,
    readonly y: Scale,
    readonly title: string,
    readonly xLabel: string,
    readonly yLabel: string,
  ) {}

  axes(): void {
    const { left, top } = MARGIN;
    const right = WIDTH - MARGIN.right;
    const bottom = HEIGHT - MARGIN.bottom;
    this.parts.push(
      `<rect x="${left}" y="${top}" width="${right - left}" height="${bottom - top}" fill="none" stroke="#333" stroke-width="1"/>`,
    );
    for (const t of ticks(this.x.domain)) {
      const px = this.x(t);
      if (px < left - 0.5 || px > right + 0.5) continue;
      this.parts.push(
        `<line x1="${fmt(px)}" y1="${bottom}" x2="${fmt(px)}" y2="${bottom + 5}" stroke="#333"/>`,
        `<text x="${fmt(px)}" y="${bottom + 20}" text-anchor="middle" class="tick">${fmt(t)}</text>`,
      );
    }
    for (const t of ticks(this.y.domain)) {
      const py = this.y(t);
      if (py < top - 0.5 || py > bottom + 0.5) continue;
      this.parts.push(
        `<line x1="${left - 5}" y1="${fmt(py)}" x2="${left}" y2="${fmt(py)}" stroke="#333"/>`,
        `<text x="${left - 9}" y="${fmt(py + 4)}" text-anchor="end" class="tick">${fmt(t)}</text>`,
      );
    }
    this.parts.push(
      `<text x="${(left + right) / 2}" y="${HEIGHT - 12}" text-anchor="middle" class="label">${esc(this.xLabel)}</text>`,
      `<text x="20" y="${(top + bottom) / 2}" text-anchor="middle" class="label" transform="rotate(-90 20 ${(top + bottom) / 2})">${esc(this.yLabel)}</text>`,
      `<text x="${(left + right) / 2}" y="24" text-anchor="middle" class="title">${esc(this.title)}</text>`,
    );
  }

  polyline(xs: number[], ys: number[], color: string, label?: string): void {
    const pts: string[] = [];
    for (let i = 0; i < xs.length; i++) {
      if (Number.isFinite(xs[i]) && Number.isFinite(ys[i])) {
        pts.push(`${fmt(this.x(xs[i]))},${fmt(this.y(ys[i]))}`);
      }
    }
    this.parts.push(
      `<polyline points="${pts.join(' ')}" fill="none" stroke="${color}" stroke-width="1.5"/>`,
    );
    if (label) this.legendEntries.push({ label, color });
  }

  guideLine(yValue: number, color = '#888'): void {
    const py = this.y(yValue);
    const left = MARGIN.left;
    const right = WIDTH - MARGIN.right;
    this.parts.push(
      `<line x1="${left}" y1="${fmt(py)}" x2="${right}" y2="${fmt(py)}" stroke="${color}" stroke-dasharray="6 4" stroke-width="1" class="guide"/>`,
      `<text x="${right - 4}" y="${fmt(py - 4)}" text-anchor="end" class="tick" fill="${color}">${fmt(yValue)}</text>`,
    );
  }

  marker(px: number, py: number, kind: string, color: string, cls: string): void {
    const x = fmt(this.x(px));
    const y = fmt(this.y(py));
    if (kind === 'circle') {
      this.parts.push(`<circle cx="${x}" cy="${y}" r="5" fill="${color}" class="${cls}"/>`);
    } else if (kind === 'open-circle') {
      this.parts.push(
        `<circle cx="${x}" cy="${y}" r="4" fill="none" stroke="${color}" stroke-width="1.3" class="${cls}"/>`,
      );
    } else if (kind === 'cross') {
      this.parts.push(
        `<path d="M ${fmt(this.x(px) - 4)} ${fmt(this.y(py) - 4)} L ${fmt(this.x(px) + 4)} ${fmt(this.y(py) + 4)} M ${fmt(this.x(px) - 4)} ${fmt(this.y(py) + 4)} L ${fmt(this.x(px) + 4)} ${fmt(this.y(py) - 4)}" stroke="${color}" stroke-width="1.4" class="${cls}"/>`,
      );
    } else {
      this.parts.push(`<circle cx="${x}" cy="${y}" r="2" fill="${color}" class="${cls}"/>`);
    }
  }

  legendMarker(label: string, color: string, marker: string): void {
    this.legendEntries.push({ label, color, marker });
  }

  render(): string {
    const lx = WIDTH - MARGIN.right + 16;
    const legend: string[] = [];
    this.legendEntries.forEach((entry, i) => {
      const ly = MARGIN.top + 14 + i * 22;
      if (entry.marker === 'cross') {
        legend.push(
          `<path d="M ${lx} ${ly - 4} L ${lx + 8} ${ly + 4} M ${lx} ${ly + 4} L ${lx + 8} ${ly - 4}" stroke="${entry.color}" stroke-width="1.4"/>`,
        );
      } else if (entry.marker === 'open-circle') {
        legend.push(
          `<circle cx="${lx + 4}" cy="${ly}" r="4" fill="none" stroke="${entry.color}" stroke-width="1.3"/>`,
        );
      } else if (entry.marker === 'circle') {
        legend.push(`<circle cx="${lx + 4}" cy="${ly}" r="4" fill="${entry.color}"/>`);
      } else if (entry.marker === 'dot') {
        legend.push(`<circle cx="${lx + 4}" cy="${ly}" r="2" fill="${entry.color}"/>`);
      } else {
        legend.push(
          `<line x1="${lx}" y1="${ly}" x2="${lx + 14}" y2="${ly}" stroke="${entry.color}" stroke-width="2"/>`,
        );
      }
      legend.push(
        `<text x="${lx + 20}" y="${ly + 4}" class="legend">${esc(entry.label)}</text>`,
      );
    });
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
      '<style>text{font-family:sans-serif}.tick{font-size:11px}.label{font-size:14px}.title{font-size:15px}.legend{font-size:13px}</style>',
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
      ...this.parts,
      ...legend,
      '</svg>',
      '',
    ].join('\n');
  }
}
