/** Linear and log10 scales with deterministic tick generation. */

export interface Scale {
  (v: number): number;
  ticks(): number[];
  domain: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const fn = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  fn.domain = domain;
  fn.ticks = () => linearTicks(d0, d1, 5);
  return fn;
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  const lo = Math.log10(domain[0]);
  const hi = Math.log10(domain[1]);
  const base = linearScale([lo, hi], range);
  const fn = ((v: number) => base(Math.log10(v))) as Scale;
  fn.domain = domain;
  fn.ticks = () => {
    const out: number[] = [];
    for (let e = Math.ceil(lo); e <= Math.floor(hi); e++) out.push(Math.pow(10, e));
    if (out.length === 0) out.push(domain[0], domain[1]);
    return out;
  };
  return fn;
}

export function linearTicks(lo: number, hi: number, count: number): number[] {
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const norm = rawStep / mag;
  const step = (norm < 1.5 ? 1 : norm < 3.5 ? 2 : norm < 7.5 ? 5 : 10) * mag;
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + step * 1e-9; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

export function tickLabel(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) {
    return parseFloat(v.toPrecision(6)).toString();
  }
  const e = Math.floor(Math.log10(a));
  const mant = v / Math.pow(10, e);
  const m = parseFloat(mant.toPrecision(3));
  return m === 1 ? `1e${e}` : `${m}e${e}`;
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (!isFinite(v)) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!isFinite(lo)) throw new Error("no finite values to scale");
  return [lo, hi];
}

export function padLog(domain: [number, number]): [number, number] {
  return [domain[0] / 1.5, domain[1] * 1.5];
}

export function padLinear(domain: [number, number], frac = 0.06): [number, number] {
  const span = domain[1] - domain[0] || Math.abs(domain[0]) || 1;
  return [domain[0] - frac * span, domain[1] + frac * span];
}
