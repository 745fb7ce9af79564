/** Minimal deterministic SVG builder.
 *
 *  Coordinates are formatted with a fixed number of decimals so the same
 *  inputs always serialize to the same bytes.
 */

export function fmt(x: number): string {
  if (!isFinite(x)) throw new Error(`non-finite coordinate ${x}`);
  const s = x.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export class SvgDoc {
  private parts: string[] = [];
  constructor(readonly width: number, readonly height: number, background: string) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}">`,
    );
    this.parts.push(
      `<rect x="0" y="0" width="${width}" height="${height}" fill="${background}"/>`,
    );
  }

  line(x1: number, y1: number, x2: number, y2: number, attrs: string): void {
    this.parts.push(
      `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ${attrs}/>`,
    );
  }

  polyline(points: Array<[number, number]>, attrs: string): void {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(`<polyline points="${pts}" fill="none" ${attrs}/>`);
  }

  polygon(points: Array<[number, number]>, attrs: string): void {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    this.parts.push(`<polygon points="${pts}" ${attrs}/>`);
  }

  circle(cx: number, cy: number, r: number, attrs: string): void {
    this.parts.push(`<circle cx="${fmt(cx)}" cy="${fmt(cy)}" r="${fmt(r)}" ${attrs}/>`);
  }

  rect(x: number, y: number, w: number, h: number, attrs: string): void {
    this.parts.push(
      `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" ${attrs}/>`,
    );
  }

  text(x: number, y: number, content: string, attrs: string): void {
    this.parts.push(`<text x="${fmt(x)}" y="${fmt(y)}" ${attrs}>${esc(content)}</text>`);
  }

  raw(s: string): void {
    this.parts.push(s);
  }

  render(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}
