import { drawAxes, drawLegend, frame, LegendEntry } from "../axes";
import { num, readCsv, Row, SchemaError } from "../csv";
import { extent, logScale, padLog } from "../scales";
import { FigureSpec, requireInput } from "../spec";
import { Style } from "../style";
import { SvgDoc } from "../svg";

const COLUMNS = ["estimator", "N", "seed", "err_mean_l2", "err_mean_linf", "err_cov_fro"];

function median(values: number[]): number {
  const v = [...values].sort((a, b) => a - b);
  const m = v.length >> 1;
  return v.length % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/** Log-log error-vs-N curves per estimator, with a dashed 1/sqrt(N) guide;
 *  sample-free entries (N = 0) appear as horizontal reference lines. */
export function renderConvergence(spec: FigureSpec, style: Style): string {
  const rows = readCsv(requireInput(spec, "csv"), COLUMNS);
  const metric = (spec.options["metric"] as string) ?? "err_mean_l2";
  if (!COLUMNS.includes(metric) || !metric.startsWith("err_")) {
    throw new SchemaError(`unknown metric '${metric}'`);
  }
  const byEstimator = new Map<string, Map<number, number[]>>();
  for (const row of rows) {
    const est = row["estimator"];
    const N = num(row, "N");
    if (!byEstimator.has(est)) byEstimator.set(est, new Map());
    const m = byEstimator.get(est)!;
    if (!m.has(N)) m.set(N, []);
    m.get(N)!.push(num(row, metric));
  }

  const sampling: Array<[string, Array<[number, number]>]> = [];
  const flat: Array<[string, number]> = [];
  for (const [est, m] of byEstimator) {
    const ns = [...m.keys()].sort((a, b) => a - b);
    if (ns.length === 1 && ns[0] === 0) {
      flat.push([est, median(m.get(0)!)]);
    } else {
      sampling.push([est, ns.filter((n) => n > 0).map(
        (n) => [n, median(m.get(n)!)] as [number, number])]);
    }
  }
  if (sampling.length === 0) throw new SchemaError("no sampling estimators in CSV");

  const allN = sampling.flatMap(([, pts]) => pts.map(([n]) => n));
  const allE = sampling.flatMap(([, pts]) => pts.map(([, e]) => e))
    .concat(flat.map(([, e]) => e));
  const f = frame(style);
  const xS = logScale(padLog(extent(allN)), [f.x0, f.x1]);
  const yS = logScale(padLog(extent(allE.filter((e) => e > 0))), [f.y0, f.y1]);

  const doc = new SvgDoc(style.width, style.height, style.background);
  drawAxes(doc, style, f, xS, yS, "N", metric, spec.title);

  // 1/sqrt(N) guide anchored at the first curve's first point
  const anchor = sampling[0][1][0];
  const guide: Array<[number, number]> = xS.ticks().map((n) => [
    n, anchor[1] * Math.sqrt(anchor[0] / n)]);
  doc.polyline(guide.map(([n, e]) => [xS(n), yS(Math.max(e, yS.domain[0]))]),
    `stroke="${style.guideColor}" stroke-width="1" stroke-dasharray="6,4"`);

  const legend: LegendEntry[] = [{ label: "1/sqrt(N)", color: style.guideColor, dash: "6,4" }];
  sampling.forEach(([est, pts], i) => {
    const color = style.seriesColors[i % style.seriesColors.length];
    doc.polyline(pts.map(([n, e]) => [xS(n), yS(e)]), `stroke="${color}" stroke-width="1.6"`);
    for (const [n, e] of pts) doc.circle(xS(n), yS(e), 2.2, `fill="${color}"`);
    legend.push({ label: est, color });
  });
  flat.forEach(([est, e], i) => {
    const color = style.seriesColors[(sampling.length + i) % style.seriesColors.length];
    doc.line(f.x0, yS(e), f.x1, yS(e), `stroke="${color}" stroke-width="1.3" stroke-dasharray="2,3"`);
    legend.push({ label: est, color, dash: "2,3" });
  });
  drawLegend(doc, style, f, legend);
  return doc.render();
}
