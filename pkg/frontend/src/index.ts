/** Top-level entry: CSV text in, image file out. */

import { readFileSync, writeFileSync } from "node:fs";

import { parseDesignCsv, parseResultsCsv } from "./csv.js";
import {
  FIGURE_IDS,
  FIGURES,
  FigureId,
  groupDesign,
  groupSweep,
} from "./figures.js";
import { renderDesign, renderSweep } from "./render.js";

export interface RenderSummary {
  panels: number;
  series: number;
  points: number;
  bars: number;
}

export function isFigureId(id: string): id is FigureId {
  return (FIGURE_IDS as readonly string[]).includes(id);
}

/** Render a figure to an SVG string without touching the filesystem. */
export function renderFigure(
  figureId: FigureId,
  csvText: string,
): { svg: string; summary: RenderSummary } {
  const def = FIGURES[figureId];
  if (def.kind === "design") {
    const groups = groupDesign(parseDesignCsv(csvText));
    const svg = renderDesign(groups);
    const bars = groups.reduce(
      (n, g) => n + g.bars.filter((b) => b.value !== null).length,
      0,
    );
    return { svg, summary: { panels: 1, series: 0, points: 0, bars } };
  }
  const data = groupSweep(def, parseResultsCsv(csvText));
  const svg = renderSweep(data);
  const series = data.panels.reduce((n, p) => n + p.series.length, 0);
  const points = data.panels.reduce(
    (n, p) => n + p.series.reduce((m, s) => m + s.points.length, 0),
    0,
  );
  return {
    svg,
    summary: { panels: data.panels.length, series, points, bars: 0 },
  };
}

/** Read a CSV, render it, write .svg or .png. Nothing is written on error. */
export async function renderFile(
  figureId: FigureId,
  inPath: string,
  outPath: string,
): Promise<RenderSummary> {
  const csvText = readFileSync(inPath, "utf-8");
  const { svg, summary } = renderFigure(figureId, csvText);
  if (outPath.endsWith(".png")) {
    const { Resvg } = await import("@resvg/resvg-js");
    const png = new Resvg(svg).render().asPng();
    writeFileSync(outPath, png);
  } else if (outPath.endsWith(".svg")) {
    writeFileSync(outPath, svg, "utf-8");
  } else {
    throw new Error(`output path must end in .svg or .png, got '${outPath}'`);
  }
  return summary;
}
