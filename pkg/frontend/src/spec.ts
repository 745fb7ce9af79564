import { z } from "zod";

import { SchemaError } from "./csv";

export const FIGURE_KINDS = [
  "convergence",
  "spectrum",
  "marginal-1d",
  "field-2d",
  "posterior-metrics",
] as const;

const figureSpecSchema = z.object({
  kind: z.enum(FIGURE_KINDS),
  inputs: z.record(z.string(), z.string()),
  options: z.record(z.string(), z.unknown()).default({}),
  style: z.record(z.string(), z.unknown()).optional(),
  output: z
    .string()
    .refine((p) => /\.(svg|png|pdf)$/.test(p), {
      message: "output must end in .svg, .png, or .pdf",
    }),
  title: z.string().optional(),
});

export type FigureSpec = z.infer<typeof figureSpecSchema>;

export function parseSpec(obj: unknown): FigureSpec {
  const res = figureSpecSchema.safeParse(obj);
  if (!res.success) {
    const issue = res.error.issues[0];
    throw new SchemaError(
      `invalid figure spec: ${issue.path.join(".") || "(root)"}: ${issue.message}`,
    );
  }
  return res.data;
}

export function requireInput(spec: FigureSpec, key: string): string {
  const v = spec.inputs[key];
  if (!v) throw new SchemaError(`figure spec for '${spec.kind}' needs inputs.${key}`);
  return v;
}
