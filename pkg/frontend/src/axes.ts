import { Scale, tickLabel } from "./scales";
import { SvgDoc } from "./svg";
import { Style } from "./style";

export interface Frame {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

export function frame(style: Style): Frame {
  return {
    x0: style.margin.left,
    x1: style.width - style.margin.right,
    y0: style.height - style.margin.bottom,
    y1: style.margin.top,
  };
}

export function drawAxes(
  doc: SvgDoc,
  style: Style,
  f: Frame,
  xScale: Scale,
  yScale: Scale,
  xLabel: string,
  yLabel: string,
  title?: string,
): void {
  const axis = `stroke="${style.axisColor}" stroke-width="1"`;
  const grid = `stroke="${style.gridColor}" stroke-width="0.5"`;
  const font = `font-family="${style.fontFamily}" font-size="${style.fontSize}" fill="${style.axisColor}"`;
  for (const t of xScale.ticks()) {
    const x = xScale(t);
    doc.line(x, f.y0, x, f.y1, grid);
    doc.line(x, f.y0, x, f.y0 + 4, axis);
    doc.text(x, f.y0 + 16, tickLabel(t), `${font} text-anchor="middle"`);
  }
  for (const t of yScale.ticks()) {
    const y = yScale(t);
    doc.line(f.x0, y, f.x1, y, grid);
    doc.line(f.x0 - 4, y, f.x0, y, axis);
    doc.text(f.x0 - 7, y + 3.5, tickLabel(t), `${font} text-anchor="end"`);
  }
  doc.line(f.x0, f.y0, f.x1, f.y0, axis);
  doc.line(f.x0, f.y0, f.x0, f.y1, axis);
  doc.text((f.x0 + f.x1) / 2, f.y0 + 32, xLabel, `${font} text-anchor="middle"`);
  doc.raw(
    `<text x="${(14).toFixed(2)}" y="${((f.y0 + f.y1) / 2).toFixed(2)}" ${font} ` +
    `text-anchor="middle" transform="rotate(-90 14 ${((f.y0 + f.y1) / 2).toFixed(2)})">` +
    `${yLabel}</text>`,
  );
  if (title) {
    doc.text((f.x0 + f.x1) / 2, f.y1 - 10, title,
      `${font} text-anchor="middle" font-weight="bold"`);
  }
}

export interface LegendEntry {
  label: string;
  color: string;
  dash?: string;
}

export function drawLegend(doc: SvgDoc, style: Style, f: Frame, entries: LegendEntry[]): void {
  const font = `font-family="${style.fontFamily}" font-size="${style.fontSize}" fill="${style.axisColor}"`;
  let y = f.y1 + 12;
  for (const e of entries) {
    const dash = e.dash ? ` stroke-dasharray="${e.dash}"` : "";
    doc.line(f.x1 - 92, y - 3.5, f.x1 - 72, y - 3.5,
      `stroke="${e.color}" stroke-width="1.6"${dash}`);
    doc.text(f.x1 - 68, y, e.label, font);
    y += 14;
  }
}
