/** Layout and marks: FigureData in, standalone SVG document out.
 *
 * Marks carry stable class names so the output stays machine-checkable:
 * every panel is a <g class="panel">, every line a <polyline class="series">,
 * every datum a <circle class="point">, every confidence interval a
 * <line class="errorbar">, every design-table column a <rect class="bar">.
 */

import { BarGroup, FigureData } from "./figures.js";
import { fmtTick, px, tag, text } from "./svg.js";

const PLOT_W = 250;
const PLOT_H = 210;
const MARGIN = { left: 56, right: 16, top: 34, bottom: 48 };
const PANEL_W = MARGIN.left + PLOT_W + MARGIN.right;
const PANEL_H = MARGIN.top + PLOT_H + MARGIN.bottom;

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
const FONT = "font-family";
const SANS = "Helvetica, Arial, sans-serif";

interface Scale {
  (value: number): number;
  ticks: number[];
}

function linearScale(lo: number, hi: number, range: number): Scale {
  const span = hi - lo || 1;
  const scale = ((value: number) => ((value - lo) / span) * range) as Scale;
  const rawStep = span / 4;
  const power = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const step = [1, 2, 5, 10].map((m) => m * power).find((s) => span / s <= 5)!;
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) {
    ticks.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  scale.ticks = ticks;
  return scale;
}

function logScale(lo: number, hi: number, range: number): Scale {
  const llo = Math.log10(lo);
  const lhi = Math.log10(hi);
  const span = lhi - llo || 1;
  const scale = ((value: number) =>
    ((Math.log10(value) - llo) / span) * range) as Scale;
  const ticks: number[] = [];
  for (let d = Math.ceil(llo); d <= Math.floor(lhi); d += 1) {
    ticks.push(Math.pow(10, d));
  }
  if (ticks.length < 2) {
    scale.ticks = [lo, hi];
  } else {
    scale.ticks = ticks;
  }
  return scale;
}

function xDomain(data: FigureData): [number, number] {
  const xs = data.panels.flatMap((p) =>
    p.series.flatMap((s) => s.points.map((pt) => pt.x)),
  );
  let lo = Math.min(...xs);
  let hi = Math.max(...xs);
  if (!data.logX) {
    const pad = (hi - lo || Math.abs(hi) || 1) * 0.05;
    lo -= pad;
    hi += pad;
  }
  return [lo, hi];
}

function axes(x: Scale, y: Scale, xLabel: string, yLabel: string): string {
  const parts: string[] = [];
  parts.push(
    tag("line", { x1: 0, y1: PLOT_H, x2: PLOT_W, y2: PLOT_H, stroke: "#333" }),
    tag("line", { x1: 0, y1: 0, x2: 0, y2: PLOT_H, stroke: "#333" }),
  );
  for (const t of x.ticks) {
    const tx = x(t);
    if (tx < -1e-6 || tx > PLOT_W + 1e-6) continue;
    parts.push(
      tag("line", { x1: tx, y1: PLOT_H, x2: tx, y2: PLOT_H + 5, stroke: "#333" }),
      text(fmtTick(t), {
        x: tx,
        y: PLOT_H + 18,
        "text-anchor": "middle",
        "font-size": 11,
        [FONT]: SANS,
      }),
    );
  }
  for (const t of y.ticks) {
    const ty = PLOT_H - y(t);
    parts.push(
      tag("line", { x1: -5, y1: ty, x2: 0, y2: ty, stroke: "#333" }),
      tag("line", {
        x1: 0,
        y1: ty,
        x2: PLOT_W,
        y2: ty,
        stroke: "#ddd",
        "stroke-dasharray": "3,3",
      }),
      text(fmtTick(t), {
        x: -9,
        y: ty + 4,
        "text-anchor": "end",
        "font-size": 11,
        [FONT]: SANS,
      }),
    );
  }
  parts.push(
    text(xLabel, {
      x: PLOT_W / 2,
      y: PLOT_H + 38,
      "text-anchor": "middle",
      "font-size": 12,
      [FONT]: SANS,
    }),
    text(yLabel, {
      x: 0,
      y: 0,
      transform: `translate(${px(-42)},${px(PLOT_H / 2)}) rotate(-90)`,
      "text-anchor": "middle",
      "font-size": 12,
      [FONT]: SANS,
    }),
  );
  return parts.join("");
}

export function renderSweep(data: FigureData): string {
  const [xLo, xHi] = xDomain(data);
  const panels = data.panels.map((panel, index) => {
    const x = data.logX
      ? logScale(xLo, xHi, PLOT_W)
      : linearScale(xLo, xHi, PLOT_W);
    const y = linearScale(0, 1, PLOT_H);
    const parts: string[] = [axes(x, y, data.xLabel, data.yLabel)];
    if (panel.title) {
      parts.push(
        text(panel.title, {
          x: PLOT_W / 2,
          y: -14,
          "text-anchor": "middle",
          "font-size": 13,
          "font-weight": "bold",
          [FONT]: SANS,
        }),
      );
    }
    panel.series.forEach((series, si) => {
      const color = PALETTE[si % PALETTE.length];
      const coords = series.points
        .map((p) => `${px(x(p.x))},${px(PLOT_H - y(p.y))}`)
        .join(" ");
      parts.push(
        tag("polyline", {
          class: "series",
          "data-name": series.name,
          points: coords,
          fill: "none",
          stroke: color,
          "stroke-width": 1.5,
        }),
      );
      for (const p of series.points) {
        const cx = x(p.x);
        if (p.trials > 1) {
          const y0 = PLOT_H - y(p.lo);
          const y1 = PLOT_H - y(p.hi);
          parts.push(
            tag("line", {
              class: "errorbar",
              x1: cx,
              y1: y0,
              x2: cx,
              y2: y1,
              stroke: color,
              "stroke-width": 1,
            }),
          );
        }
        parts.push(
          tag("circle", {
            class: "point",
            cx,
            cy: PLOT_H - y(p.y),
            r: 2.6,
            fill: color,
          }),
        );
      }
      parts.push(
        tag("line", {
          x1: 6,
          y1: 8 + si * 15,
          x2: 22,
          y2: 8 + si * 15,
          stroke: color,
          "stroke-width": 1.5,
        }),
        text(series.name, {
          x: 26,
          y: 12 + si * 15,
          "font-size": 11,
          [FONT]: SANS,
        }),
      );
    });
    const ox = index * PANEL_W + MARGIN.left;
    return tag(
      "g",
      { class: "panel", transform: `translate(${px(ox)},${px(MARGIN.top)})` },
      ...parts,
    );
  });
  const width = data.panels.length * PANEL_W;
  return tag(
    "svg",
    {
      xmlns: "http://www.w3.org/2000/svg",
      width,
      height: PANEL_H,
      viewBox: `0 0 ${width} ${PANEL_H}`,
    },
    tag("rect", { x: 0, y: 0, width, height: PANEL_H, fill: "#fff" }),
    ...panels,
  );
}

export function renderDesign(groups: BarGroup[]): string {
  const values = groups.flatMap((g) =>
    g.bars.map((b) => b.value).filter((v): v is number => v !== null),
  );
  if (values.length === 0) {
    throw new Error("design table has no attainable rows to plot");
  }
  const perGroup = Math.max(...groups.map((g) => g.bars.length));
  const groupW = perGroup * 26 + 24;
  const plotW = groups.length * groupW;
  const y = linearScale(0, Math.max(...values) * 1.08, PLOT_H);
  const parts: string[] = [];
  parts.push(
    tag("line", { x1: 0, y1: PLOT_H, x2: plotW, y2: PLOT_H, stroke: "#333" }),
    tag("line", { x1: 0, y1: 0, x2: 0, y2: PLOT_H, stroke: "#333" }),
  );
  for (const t of y.ticks) {
    const ty = PLOT_H - y(t);
    parts.push(
      tag("line", { x1: -5, y1: ty, x2: 0, y2: ty, stroke: "#333" }),
      text(fmtTick(t), {
        x: -9,
        y: ty + 4,
        "text-anchor": "end",
        "font-size": 11,
        [FONT]: SANS,
      }),
    );
  }
  groups.forEach((group, gi) => {
    const gx = gi * groupW + 12;
    group.bars.forEach((bar, bi) => {
      const bx = gx + bi * 26;
      if (bar.value === null) {
        parts.push(
          text("n/a", {
            x: bx + 11,
            y: PLOT_H - 6,
            "text-anchor": "middle",
            "font-size": 9,
            [FONT]: SANS,
          }),
        );
        return;
      }
      const h = y(bar.value);
      parts.push(
        tag("rect", {
          class: "bar",
          "data-label": `${group.vessel} ${bar.label}`,
          x: bx,
          y: PLOT_H - h,
          width: 22,
          height: h,
          fill: PALETTE[bi % PALETTE.length],
        }),
        text(String(bar.value), {
          x: bx + 11,
          y: PLOT_H - h - 4,
          "text-anchor": "middle",
          "font-size": 9,
          [FONT]: SANS,
        }),
      );
    });
    parts.push(
      text(group.vessel, {
        x: gx + (group.bars.length * 26) / 2,
        y: PLOT_H + 18,
        "text-anchor": "middle",
        "font-size": 12,
        [FONT]: SANS,
      }),
    );
  });
  parts.push(
    text("smallest N reaching target p_d", {
      x: 0,
      y: 0,
      transform: `translate(${px(-42)},${px(PLOT_H / 2)}) rotate(-90)`,
      "text-anchor": "middle",
      "font-size": 12,
      [FONT]: SANS,
    }),
  );
  const width = MARGIN.left + plotW + MARGIN.right;
  return tag(
    "svg",
    {
      xmlns: "http://www.w3.org/2000/svg",
      width,
      height: PANEL_H,
      viewBox: `0 0 ${width} ${PANEL_H}`,
    },
    tag("rect", { x: 0, y: 0, width, height: PANEL_H, fill: "#fff" }),
    tag(
      "g",
      { class: "panel", transform: `translate(${px(MARGIN.left)},${px(MARGIN.top)})` },
      ...parts,
    ),
  );
}
