import { drawAxes, drawLegend, frame, LegendEntry } from "../axes";
import { readJson, SchemaError } from "../csv";
import { extent, linearScale, padLinear } from "../scales";
import { FigureSpec, requireInput } from "../spec";
import { Style } from "../style";
import { SvgDoc } from "../svg";

interface MarginalData {
  x: number[];
  mean: number[];
  sigma: number[];
  truth?: number[];
  samples?: number[][];
}

function asMarginal(obj: unknown, path: string): MarginalData {
  const root = obj as Record<string, unknown>;
  const source = (root["marginal"] ?? root) as Record<string, unknown>;
  for (const key of ["x", "mean", "sigma"]) {
    if (!Array.isArray(source[key])) {
      throw new SchemaError(`missing field '${key}' in ${path}`);
    }
  }
  const data = source as unknown as MarginalData;
  if (data.mean.length !== data.x.length || data.sigma.length !== data.x.length) {
    throw new SchemaError(`inconsistent array lengths in ${path}`);
  }
  return data;
}

/** One-dimensional posterior marginal: mean with +-1 and +-2 sigma bands,
 *  the truth, and two posterior samples. */
export function renderMarginal(spec: FigureSpec, style: Style): string {
  const path = requireInput(spec, "json");
  const data = asMarginal(readJson(path), path);
  const ys: number[] = [];
  data.x.forEach((_, i) => {
    ys.push(data.mean[i] - 2 * data.sigma[i], data.mean[i] + 2 * data.sigma[i]);
  });
  if (data.truth) ys.push(...data.truth);
  for (const s of data.samples ?? []) ys.push(...s);

  const f = frame(style);
  const xS = linearScale(padLinear(extent(data.x), 0.02), [f.x0, f.x1]);
  const yS = linearScale(padLinear(extent(ys)), [f.y0, f.y1]);

  const doc = new SvgDoc(style.width, style.height, style.background);
  // +-2 sigma band beneath the +-1 sigma band
  for (const [scale, opacity] of [[2, style.bandOpacity2], [1, style.bandOpacity1]] as const) {
    const upper = data.x.map((x, i) =>
      [xS(x), yS(data.mean[i] + scale * data.sigma[i])] as [number, number]);
    const lower = data.x.map((x, i) =>
      [xS(x), yS(data.mean[i] - scale * data.sigma[i])] as [number, number]).reverse();
    doc.polygon(upper.concat(lower),
      `fill="${style.bandColor}" fill-opacity="${opacity}" stroke="none"`);
  }
  drawAxes(doc, style, f, xS, yS, "x", "m", spec.title);
  const legend: LegendEntry[] = [];
  for (const s of data.samples ?? []) {
    doc.polyline(data.x.map((x, i) => [xS(x), yS(s[i])]),
      `stroke="${style.sampleColor}" stroke-width="1.1"`);
  }
  if ((data.samples ?? []).length > 0) {
    legend.push({ label: "samples", color: style.sampleColor });
  }
  doc.polyline(data.x.map((x, i) => [xS(x), yS(data.mean[i])]),
    `stroke="${style.meanColor}" stroke-width="1.8"`);
  legend.push({ label: "mean", color: style.meanColor });
  if (data.truth) {
    doc.polyline(data.x.map((x, i) => [xS(x), yS(data.truth![i])]),
      `stroke="${style.truthColor}" stroke-width="1.5"`);
    legend.push({ label: "truth", color: style.truthColor });
  }
  drawLegend(doc, style, f, legend);
  return doc.render();
}
