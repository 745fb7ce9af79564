/** Pinned rendering style: all visual constants live here so that a fixed
 *  style file yields byte-identical output. */

export interface Style {
  width: number;
  height: number;
  margin: { top: number; right: number; bottom: number; left: number };
  background: string;
  fontFamily: string;
  fontSize: number;
  axisColor: string;
  gridColor: string;
  seriesColors: string[];
  guideColor: string;
  noiseLineColor: string;
  meanColor: string;
  truthColor: string;
  sampleColor: string;
  bandColor: string;
  bandOpacity1: number;
  bandOpacity2: number;
  heatmap: string[];
}

export const DEFAULT_STYLE: Style = {
  width: 480,
  height: 360,
  margin: { top: 28, right: 16, bottom: 44, left: 58 },
  background: "#ffffff",
  fontFamily: "Helvetica, Arial, sans-serif",
  fontSize: 11,
  axisColor: "#222222",
  gridColor: "#dddddd",
  // series palette follows the blue / red / yellow convention
  seriesColors: ["#1f77b4", "#d62728", "#e6b800", "#2ca02c", "#9467bd", "#8c564b"],
  guideColor: "#555555",
  noiseLineColor: "#333333",
  meanColor: "#1f77b4",
  truthColor: "#d62728",
  sampleColor: "#e6b800",
  bandColor: "#808080",
  bandOpacity1: 0.35,
  bandOpacity2: 0.18,
  heatmap: ["#30123b", "#4145ab", "#2eb4f2", "#1ae4b6", "#72fe5e", "#c9ef34",
    "#fbb938", "#f56918", "#c92903", "#7a0403"],
};

export function mergeStyle(overrides?: Partial<Style>): Style {
  return { ...DEFAULT_STYLE, ...(overrides ?? {}) };
}
