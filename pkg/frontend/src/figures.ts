/** Figure catalog: what each figure id expects from its CSV and how the
 * rows group into panels and series.
 */

import { DesignRow, SweepRow } from "./csv.js";

export const FIGURE_IDS = [
  "fig4",
  "fig5",
  "fig6",
  "fig7",
  "fig8",
  "table3",
] as const;

export type FigureId = (typeof FIGURE_IDS)[number];

const VESSEL_ORDER = ["capillary", "venule", "arteriole"];

interface SweepFigureDef {
  kind: "sweep";
  axisName: string;
  xLabel: string;
  logX: boolean;
  /** one panel per vessel, or a single panel holding every row */
  panelPerVessel: boolean;
  /** series split within a panel */
  seriesBy: "variant" | "vessel";
  requiredVariants: string[];
}

interface DesignFigureDef {
  kind: "design";
}

export type FigureDef = SweepFigureDef | DesignFigureDef;

export const FIGURES: Record<FigureId, FigureDef> = {
  fig4: {
    kind: "sweep",
    axisName: "N",
    xLabel: "nanomachine count N",
    logX: true,
    panelPerVessel: true,
    seriesBy: "variant",
    requiredVariants: ["uniform", "laminar"],
  },
  fig5: {
    kind: "sweep",
    axisName: "alpha_v",
    xLabel: "velocity cofactor",
    logX: false,
    panelPerVessel: false,
    seriesBy: "variant",
    requiredVariants: ["uniform", "laminar"],
  },
  fig6: {
    kind: "sweep",
    axisName: "alpha_v",
    xLabel: "velocity cofactor",
    logX: false,
    panelPerVessel: false,
    seriesBy: "vessel",
    requiredVariants: ["laminar"],
  },
  fig7: {
    kind: "sweep",
    axisName: "M",
    xLabel: "margination ratio M",
    logX: false,
    panelPerVessel: true,
    seriesBy: "variant",
    requiredVariants: ["laminar"],
  },
  fig8: {
    kind: "sweep",
    axisName: "a_n",
    xLabel: "nanomachine radius [m]",
    logX: false,
    panelPerVessel: true,
    seriesBy: "variant",
    requiredVariants: ["simplified", "realistic"],
  },
  table3: { kind: "design" },
};

export interface Point {
  x: number;
  y: number;
  lo: number;
  hi: number;
  trials: number;
}

export interface Series {
  name: string;
  points: Point[];
}

export interface Panel {
  title: string;
  series: Series[];
}

export interface FigureData {
  xLabel: string;
  yLabel: string;
  logX: boolean;
  panels: Panel[];
}

function vesselRank(vessel: string): number {
  const i = VESSEL_ORDER.indexOf(vessel);
  return i === -1 ? VESSEL_ORDER.length : i;
}

export function groupSweep(def: SweepFigureDef, rows: SweepRow[]): FigureData {
  if (rows.length === 0) {
    throw new Error("no data rows: cannot render an empty sweep");
  }
  for (const row of rows) {
    if (row.axisName !== def.axisName) {
      throw new Error(
        `axis mismatch: figure plots '${def.axisName}', CSV has '${row.axisName}'`,
      );
    }
  }
  const vessels = [...new Set(rows.map((r) => r.vessel))].sort(
    (a, b) => vesselRank(a) - vesselRank(b),
  );
  const panelKeys = def.panelPerVessel ? vessels : ["all"];
  const panels: Panel[] = panelKeys.map((key) => {
    const inPanel = def.panelPerVessel
      ? rows.filter((r) => r.vessel === key)
      : rows;
    const names =
      def.seriesBy === "variant"
        ? [...new Set(inPanel.map((r) => r.variant))]
        : [...new Set(inPanel.map((r) => r.vessel))].sort(
            (a, b) => vesselRank(a) - vesselRank(b),
          );
    if (def.seriesBy === "variant") {
      for (const required of def.requiredVariants) {
        if (!names.includes(required)) {
          throw new Error(
            `panel '${key}' is missing required variant '${required}'`,
          );
        }
      }
    }
    const series: Series[] = names.map((name) => {
      const members = inPanel.filter((r) =>
        def.seriesBy === "variant" ? r.variant === name : r.vessel === name,
      );
      const points = members
        .map((r) => ({
          x: r.axisValue,
          y: r.pD,
          lo: r.ciLow,
          hi: r.ciHigh,
          trials: r.trials,
        }))
        .sort((a, b) => a.x - b.x);
      return { name, points };
    });
    return { title: def.panelPerVessel ? key : "", series };
  });
  return {
    xLabel: def.xLabel,
    yLabel: "detection probability",
    logX: def.logX,
    panels,
  };
}

export interface BarGroup {
  vessel: string;
  bars: { label: string; value: number | null }[];
}

export function groupDesign(rows: DesignRow[]): BarGroup[] {
  if (rows.length === 0) {
    throw new Error("no data rows: cannot render an empty design table");
  }
  const vessels = [...new Set(rows.map((r) => r.vessel))].sort(
    (a, b) => vesselRank(a) - vesselRank(b),
  );
  return vessels.map((vessel) => {
    const members = rows
      .filter((r) => r.vessel === vessel)
      .sort((a, b) => a.radiusAn - b.radiusAn || a.target - b.target);
    return {
      vessel,
      bars: members.map((r) => ({
        label: `${r.radiusAn * 1e9} nm @ ${r.target}`,
        value: r.estimatedN,
      })),
    };
  });
}
