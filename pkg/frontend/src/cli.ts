#!/usr/bin/env node
/** Figure renderer CLI: `plots render --spec <file.json>`.
 *
 *  Exit codes: 0 success, 2 bad arguments or schema error.
 */

import { SchemaError } from "./csv";
import { renderSpecFile } from "./render";

function usage(): void {
  console.error("usage: plots render --spec <figure-spec.json> [--spec <more.json> ...]");
}

export function main(argv: string[]): number {
  const args = argv.slice(2);
  if (args[0] !== "render") {
    usage();
    return 2;
  }
  const specs: string[] = [];
  for (let i = 1; i < args.length; i++) {
    if (args[i] === "--spec" && i + 1 < args.length) {
      specs.push(args[++i]);
    } else {
      usage();
      return 2;
    }
  }
  if (specs.length === 0) {
    usage();
    return 2;
  }
  try {
    for (const spec of specs) {
      const out = renderSpecFile(spec);
      console.log(`rendered ${spec} -> ${out}`);
    }
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    throw err;
  }
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv));
}
