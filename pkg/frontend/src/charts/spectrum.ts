import { drawAxes, drawLegend, frame, LegendEntry } from "../axes";
import { num, readCsv, SchemaError } from "../csv";
import { extent, linearScale, logScale, padLinear, padLog } from "../scales";
import { FigureSpec, requireInput } from "../spec";
import { Style } from "../style";
import { SvgDoc } from "../svg";

const COLUMNS = ["estimator", "N", "seed", "index", "eigenvalue", "noise_var"];

/** Eigenvalue-vs-index overlays for increasing N, with the dotted
 *  noise-variance reference line. */
export function renderSpectrum(spec: FigureSpec, style: Style): string {
  const rows = readCsv(requireInput(spec, "csv"), COLUMNS);
  const wanted = spec.options["estimator"] as string | undefined;
  const estimators = [...new Set(rows.map((r) => r["estimator"]))];
  const est = wanted ?? estimators[0];
  if (!estimators.includes(est)) {
    throw new SchemaError(`estimator '${est}' not present in spectrum CSV`);
  }
  const byN = new Map<number, Array<[number, number]>>();
  let noiseVar = NaN;
  for (const row of rows) {
    if (row["estimator"] !== est) continue;
    const N = num(row, "N");
    if (!byN.has(N)) byN.set(N, []);
    byN.get(N)!.push([num(row, "index"), num(row, "eigenvalue")]);
    noiseVar = num(row, "noise_var");
  }
  if (byN.size === 0) throw new SchemaError("spectrum CSV has no rows");
  const ns = [...byN.keys()].sort((a, b) => a - b);

  const allIdx = ns.flatMap((n) => byN.get(n)!.map(([i]) => i));
  const allVal = ns.flatMap((n) => byN.get(n)!.map(([, v]) => v))
    .filter((v) => v > 0);
  const floor = Math.max(extent(allVal)[0], extent(allVal)[1] * 1e-16);
  const f = frame(style);
  const xS = linearScale(padLinear(extent(allIdx)), [f.x0, f.x1]);
  const yS = logScale(padLog([floor, Math.max(extent(allVal)[1], noiseVar)]),
    [f.y0, f.y1]);

  const doc = new SvgDoc(style.width, style.height, style.background);
  drawAxes(doc, style, f, xS, yS, "index", "eigenvalue", spec.title ?? est);
  if (isFinite(noiseVar) && noiseVar > 0) {
    doc.line(f.x0, yS(noiseVar), f.x1, yS(noiseVar),
      `stroke="${style.noiseLineColor}" stroke-width="1" stroke-dasharray="2,3"`);
  }
  const legend: LegendEntry[] = [
    { label: "noise var", color: style.noiseLineColor, dash: "2,3" }];
  ns.forEach((n, i) => {
    const pts = byN.get(n)!.sort((a, b) => a[0] - b[0])
      .map(([idx, v]) => [xS(idx), yS(Math.max(v, floor))] as [number, number]);
    const color = style.seriesColors[i % style.seriesColors.length];
    doc.polyline(pts, `stroke="${color}" stroke-width="1.4"`);
    legend.push({ label: `N=${n}`, color });
  });
  drawLegend(doc, style, f, legend);
  return doc.render();
}
