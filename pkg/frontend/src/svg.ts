/** Tiny SVG string builder: enough for axes, lines, circles, rects, text. */

export type Attrs = Record<string, string | number>;

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Trim float noise out of coordinates; 2 decimals is sub-pixel. */
export function px(value: number): string {
  const rounded = Math.round(value * 100) / 100;
  return String(rounded);
}

export function tag(
  name: string,
  attrs: Attrs = {},
  ...children: string[]
): string {
  const parts = Object.entries(attrs)
    .map(([k, v]) => `${k}="${typeof v === "number" ? px(v) : esc(v)}"`)
    .join(" ");
  const open = parts.length > 0 ? `<${name} ${parts}` : `<${name}`;
  if (children.length === 0) {
    return `${open}/>`;
  }
  return `${open}>${children.join("")}</${name}>`;
}

export function text(content: string, attrs: Attrs = {}): string {
  const parts = Object.entries(attrs)
    .map(([k, v]) => `${k}="${typeof v === "number" ? px(v) : esc(v)}"`)
    .join(" ");
  return `<text ${parts}>${esc(content)}</text>`;
}

/** Compact tick label: 0.25, 100, 2e-6 style. */
export function fmtTick(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 1e4 || magnitude < 1e-3) {
    return value.toExponential(0).replace("e+", "e");
  }
  return String(Math.round(value * 1e6) / 1e6);
}
