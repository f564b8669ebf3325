#!/usr/bin/env node
/**
 * plots <kind> <input.csv> -o <out.(svg|png)>
 *
 * Renders one figure per invocation from a toolkit CSV artifact.  SVG is
 * native; PNG goes through sharp when the optional dependency is present.
 */

import { readFileSync, writeFileSync } from 'node:fs';
import { SchemaError } from './csv.js';
import { FigureKind, render } from './render.js';

const KINDS = new Set(['ratios', 'exponents', 'polemap']);

function usage(): never {
  process.stderr.write(
    'usage: plots <ratios|exponents|polemap> <input.csv> -o <out.(svg|png)>\n',
  );
  process.exit(2);
}

export async function main(argv: string[]): Promise<number> {
  const args = [...argv];
  let out: string | null = null;
  const positional: string[] = [];
  while (args.length > 0) {
    const a = args.shift()!;
    if (a === '-o' || a === '--out') {
      out = args.shift() ?? null;
    } else if (a === '-h' || a === '--help') {
      usage();
    } else {
      positional.push(a);
    }
  }
  if (positional.length !== 2 || out === null) usage();
  const [kind, input] = positional;
  if (!KINDS.has(kind)) {
    process.stderr.write(`unknown figure kind '${kind}'; expected ratios|exponents|polemap\n`);
    return 2;
  }
  let text: string;
  try {
    text = readFileSync(input, 'utf8');
  } catch (err) {
    process.stderr.write(`cannot read ${input}: ${(err as Error).message}\n`);
    return 1;
  }
  let svg: string;
  try {
    svg = render(kind as FigureKind, text);
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`${err.message}\n`);
      return 1;
    }
    throw err;
  }
  if (out.endsWith('.png')) {
    try {
      const sharp = (await import('sharp')).default;
      const buf = await sharp(Buffer.from(svg)).png().toBuffer();
      writeFileSync(out, buf);
    } catch (err) {
      process.stderr.write(
        `png output needs the optional 'sharp' dependency: ${(err as Error).message}\n`,
      );
      return 1;
    }
  } else {
    writeFileSync(out, svg);
  }
  process.stdout.write(`wrote ${out}\n`);
  return 0;
}

const invoked = process.argv[1] ?? '';
if (invoked.endsWith('cli.js') || invoked.endsWith('atwood-plots')) {
  main(process.argv.slice(2)).then(
    (code) => process.exit(code),
    (err) => {
      process.stderr.write(`${err}\n`);
      process.exit(1);
    },
  );
}
