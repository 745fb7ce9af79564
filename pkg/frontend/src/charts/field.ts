import { readJson, SchemaError } from "../csv";
import { extent, linearScale, tickLabel } from "../scales";
import { FigureSpec, requireInput } from "../spec";
import { Style } from "../style";
import { fmt, SvgDoc } from "../svg";

interface MeshData {
  vertices: number[][];
  triangles: number[][];
}

function asMesh(obj: unknown, path: string): MeshData {
  const root = obj as Record<string, unknown>;
  if (!Array.isArray(root["vertices"]) || !Array.isArray(root["triangles"])) {
    throw new SchemaError(`missing field 'vertices'/'triangles' in ${path}`);
  }
  return root as unknown as MeshData;
}

function asValues(obj: unknown, path: string): number[] {
  const root = obj as Record<string, unknown>;
  const field = (root["field"] ?? root) as Record<string, unknown>;
  const values = field["values"];
  if (!Array.isArray(values)) throw new SchemaError(`missing field 'values' in ${path}`);
  return values as number[];
}

function colorAt(palette: string[], t: number): string {
  const k = Math.min(palette.length - 1, Math.max(0, Math.floor(t * palette.length)));
  return palette[k];
}

/** Vertex-averaged triangle heatmap of a nodal field, with a color bar. */
export function renderField(spec: FigureSpec, style: Style): string {
  const meshPath = requireInput(spec, "mesh");
  const valuesPath = requireInput(spec, "values");
  const mesh = asMesh(readJson(meshPath), meshPath);
  const values = asValues(readJson(valuesPath), valuesPath);
  if (values.length !== mesh.vertices.length) {
    throw new SchemaError(
      `field has ${values.length} values for ${mesh.vertices.length} mesh vertices`);
  }
  const xs = mesh.vertices.map((v) => v[0]);
  const ys = mesh.vertices.map((v) => v[1]);
  const [x0, x1] = extent(xs);
  const [y0, y1] = extent(ys);
  const barWidth = 46;
  const inner = {
    left: style.margin.left,
    right: style.width - style.margin.right - barWidth,
    top: style.margin.top,
    bottom: style.height - style.margin.bottom,
  };
  // preserve the aspect ratio of the domain
  const sx = (inner.right - inner.left) / (x1 - x0 || 1);
  const sy = (inner.bottom - inner.top) / (y1 - y0 || 1);
  const s = Math.min(sx, sy);
  const xS = (x: number) => inner.left + (x - x0) * s;
  const yS = (y: number) => inner.bottom - (y - y0) * s;

  const [vLo, vHi] = extent(values);
  const span = vHi - vLo || 1;
  const doc = new SvgDoc(style.width, style.height, style.background);
  for (const tri of mesh.triangles) {
    const avg = (values[tri[0]] + values[tri[1]] + values[tri[2]]) / 3;
    const color = colorAt(style.heatmap, (avg - vLo) / span);
    doc.polygon(tri.map((i) => [xS(mesh.vertices[i][0]), yS(mesh.vertices[i][1])] as [number, number]),
      `fill="${color}" stroke="${color}" stroke-width="0.4"`);
  }
  const font = `font-family="${style.fontFamily}" font-size="${style.fontSize}" fill="${style.axisColor}"`;
  if (spec.title) {
    doc.text((inner.left + inner.right) / 2, inner.top - 8, spec.title,
      `${font} text-anchor="middle" font-weight="bold"`);
  }
  // color bar
  const bx = style.width - style.margin.right - barWidth + 12;
  const bh = inner.bottom - inner.top;
  const steps = style.heatmap.length;
  for (let k = 0; k < steps; k++) {
    const yTop = inner.bottom - ((k + 1) / steps) * bh;
    doc.rect(bx, yTop, 12, bh / steps + 0.5, `fill="${style.heatmap[k]}" stroke="none"`);
  }
  doc.rect(bx, inner.top, 12, bh, `fill="none" stroke="${style.axisColor}" stroke-width="0.7"`);
  doc.text(bx + 16, inner.bottom + 3, tickLabel(vLo), font);
  doc.text(bx + 16, inner.top + 3, tickLabel(vHi), font);
  doc.text(bx + 16, (inner.top + inner.bottom) / 2 + 3, tickLabel((vLo + vHi) / 2), font);
  return doc.render();
}
