import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';
import { describe, expect, it } from 'vitest';

import { SchemaError, parseCsv, requireColumns } from './csv.js';
import { render, renderPolemap } from './render.js';

const here = dirname(fileURLToPath(import.meta.url));
const fixture = (name: string) =>
  readFileSync(join(here, '..', 'testdata', name), 'utf8');

describe('csv parsing', () => {
  it('reads the config comment and the columns', () => {
    const table = parseCsv(fixture('ratios_integrable.csv'));
    expect(table.columns).toEqual(['series', 'n', 'ratio', 'ratio_re', 'ratio_im']);
    expect(table.config).toHaveProperty('artifact_version');
    expect(table.rows.length).toBeGreaterThan(100);
  });

  it('reports a column diff on schema mismatch', () => {
    const table = parseCsv('a,b\n1,2\n');
    expect(() => requireColumns(table, ['a', 'series'])).toThrowError(SchemaError);
    try {
      requireColumns(table, ['a', 'series']);
    } catch (err) {
      expect((err as SchemaError).missing).toEqual(['series']);
      expect((err as SchemaError).found).toEqual(['a', 'b']);
    }
  });
});

describe('ratios figure', () => {
  const svg = render('ratios', fixture('ratios_integrable.csv'));

  it('renders one curve per series with the physics labels', () => {
    expect((svg.match(/<polyline /g) ?? []).length).toBe(4);
    for (const label of ['x₊', 'x₋', 'z', 'λ']) {
      expect(svg).toContain(`>${label}</text>`);
    }
  });

  it('is a well-formed svg document', () => {
    expect(svg.startsWith('<svg ')).toBe(true);
    expect(svg.trimEnd().endsWith('</svg>')).toBe(true);
  });

  it('is deterministic', () => {
    expect(render('ratios', fixture('ratios_integrable.csv'))).toBe(svg);
  });
});

describe('exponents figure', () => {
  const svg = render('exponents', fixture('exponents_integrable.csv'));

  it('draws the asymptote guide lines from the artifact config', () => {
    const guides = (svg.match(/class="guide"/g) ?? []).length;
    expect(guides).toBe(4); // 3/2, -1/2, 1/2, -2 for the integrable family
    expect(svg).toContain('>1.5</text>');
    expect(svg).toContain('>-2</text>');
  });

  it('renders four exponent curves', () => {
    expect((svg.match(/<polyline /g) ?? []).length).toBe(4);
  });
});

describe('polemap figure', () => {
  const text = fixture('singularities_34.csv');
  const svg = render('polemap', text);

  it('marker count equals the true-pole count in the input', () => {
    const table = parseCsv(text);
    const clsIdx = table.columns.indexOf('class');
    const trueRows = table.rows.filter((r) => r[clsIdx] === 'true_branch_point');
    const markers = (svg.match(/class="marker-true_branch_point"/g) ?? []).length;
    expect(markers).toBe(trueRows.length);
    expect(markers).toBeGreaterThan(0);
  });

  it('distinguishes classes by marker and lists counts in the legend', () => {
    expect(svg).toContain('class="marker-froissart_artifact"');
    expect(svg).toContain('class="marker-zero"');
    expect(svg).toMatch(/true_branch_point \(\d+\)/);
  });

  it('rejects a ratios file with a column diff', () => {
    expect(() => renderPolemap(parseCsv(fixture('ratios_integrable.csv')))).toThrowError(
      SchemaError,
    );
  });
});
