import * as fs from "fs";
import * as path from "path";

import { SchemaError } from "./csv";
import { FigureSpec, parseSpec } from "./spec";
import { mergeStyle, Style } from "./style";
import { renderConvergence } from "./charts/convergence";
import { renderField } from "./charts/field";
import { renderMarginal } from "./charts/marginal";
import { renderPosteriorMetrics } from "./charts/metrics";
import { renderSpectrum } from "./charts/spectrum";

export function renderSpecObject(obj: unknown, baseDir = "."): string {
  const spec = parseSpec(obj);
  const resolved: FigureSpec = {
    ...spec,
    inputs: Object.fromEntries(
      Object.entries(spec.inputs).map(([k, v]) => [k, path.resolve(baseDir, v)]),
    ),
  };
  const style = mergeStyle(spec.style as Partial<Style> | undefined);
  switch (resolved.kind) {
    case "convergence":
      return renderConvergence(resolved, style);
    case "spectrum":
      return renderSpectrum(resolved, style);
    case "marginal-1d":
      return renderMarginal(resolved, style);
    case "field-2d":
      return renderField(resolved, style);
    case "posterior-metrics":
      return renderPosteriorMetrics(resolved, style);
  }
}

/** Render the figure described by a spec file; returns the output path. */
export function renderSpecFile(specPath: string): string {
  const obj = JSON.parse(fs.readFileSync(specPath, "utf8"));
  const spec = parseSpec(obj);
  if (!spec.output.endsWith(".svg")) {
    throw new SchemaError(
      "this build renders svg only; png/pdf outputs are not supported " +
      "(rasterization would need native canvas dependencies)",
    );
  }
  const svg = renderSpecObject(obj, path.dirname(specPath));
  const outPath = path.resolve(path.dirname(specPath), spec.output);
  fs.mkdirSync(path.dirname(outPath), { recursive: true });
  fs.writeFileSync(outPath, svg);
  return outPath;
}
