import { drawAxes, drawLegend, frame, LegendEntry } from "../axes";
import { num, readCsv, SchemaError } from "../csv";
import { extent, logScale, padLog } from "../scales";
import { FigureSpec, requireInput } from "../spec";
import { Style } from "../style";
import { SvgDoc } from "../svg";

const COLUMNS = ["data_id", "estimator", "N", "seed", "map_err_sq", "w2_sq"];
const BASELINES = new Set(["ignore", "no-error", "reference"]);

function median(values: number[]): number {
  const v = [...values].sort((a, b) => a - b);
  const m = v.length >> 1;
  return v.length % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/** Posterior-accuracy medians vs N per estimator, log-log, with the
 *  no-approximation-error baseline as a horizontal dashed line. */
export function renderPosteriorMetrics(spec: FigureSpec, style: Style): string {
  const rows = readCsv(requireInput(spec, "csv"), COLUMNS);
  const metric = (spec.options["metric"] as string) ?? "w2_sq";
  if (!["w2_sq", "map_err_sq"].includes(metric)) {
    throw new SchemaError(`unknown metric '${metric}'`);
  }
  const series = new Map<string, Map<number, number[]>>();
  const baselines = new Map<string, number[]>();
  for (const row of rows) {
    const est = row["estimator"];
    const v = num(row, metric);
    if (BASELINES.has(est)) {
      if (!baselines.has(est)) baselines.set(est, []);
      baselines.get(est)!.push(v);
      continue;
    }
    const N = num(row, "N");
    if (!series.has(est)) series.set(est, new Map());
    const m = series.get(est)!;
    if (!m.has(N)) m.set(N, []);
    m.get(N)!.push(v);
  }
  if (series.size === 0) throw new SchemaError("no estimator rows in metrics CSV");

  const curves: Array<[string, Array<[number, number]>]> = [];
  for (const [est, m] of series) {
    const ns = [...m.keys()].sort((a, b) => a - b);
    curves.push([est, ns.map((n) => [n, median(m.get(n)!)] as [number, number])]);
  }
  const noErr = baselines.has("no-error") ? median(baselines.get("no-error")!) : undefined;
  const allN = curves.flatMap(([, pts]) => pts.map(([n]) => n));
  const allV = curves.flatMap(([, pts]) => pts.map(([, v]) => v))
    .concat(noErr !== undefined && noErr > 0 ? [noErr] : [])
    .filter((v) => v > 0);

  const f = frame(style);
  const xS = logScale(padLog(extent(allN)), [f.x0, f.x1]);
  const yS = logScale(padLog(extent(allV)), [f.y0, f.y1]);
  const doc = new SvgDoc(style.width, style.height, style.background);
  drawAxes(doc, style, f, xS, yS, "N", metric, spec.title);

  const legend: LegendEntry[] = [];
  if (noErr !== undefined && noErr > 0) {
    doc.line(f.x0, yS(noErr), f.x1, yS(noErr),
      `stroke="${style.guideColor}" stroke-width="1.2" stroke-dasharray="6,4"`);
    legend.push({ label: "no-error ref", color: style.guideColor, dash: "6,4" });
  }
  curves.forEach(([est, pts], i) => {
    const color = style.seriesColors[i % style.seriesColors.length];
    const clamped = pts.map(([n, v]) =>
      [xS(n), yS(Math.max(v, yS.domain[0]))] as [number, number]);
    doc.polyline(clamped, `stroke="${color}" stroke-width="1.6"`);
    for (const [x, y] of clamped) doc.circle(x, y, 2.2, `fill="${color}"`);
    legend.push({ label: est, color });
  });
  drawLegend(doc, style, f, legend);
  return doc.render();
}
