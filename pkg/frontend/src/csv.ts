/** Strict readers for the two result CSV schemas.
 *
 * Headers must match byte for byte; fields never contain commas or quotes,
 * so rows split on plain commas. Anything off-schema is a hard error.
 */

export const RESULTS_HEADER =
  "vessel,variant,axis_name,axis_value,p_d,ci_low,ci_high,trials,master_seed";

export const DESIGN_HEADER = "vessel,a_n,target,N,p_d,trials,master_seed";

export interface SweepRow {
  vessel: string;
  variant: string;
  axisName: string;
  axisValue: number;
  pD: number;
  ciLow: number;
  ciHigh: number;
  trials: number;
  masterSeed: number;
}

export interface DesignRow {
  vessel: string;
  radiusAn: number;
  target: number;
  /** null marks a row whose target was reported unattainable */
  estimatedN: number | null;
  achievedPd: number | null;
  trials: number;
  masterSeed: number;
}

function splitLines(text: string): string[] {
  return text.split(/\r?\n/).filter((line) => line.length > 0);
}

function num(field: string, line: number, name: string): number {
  const value = Number(field);
  if (field === "" || !Number.isFinite(value)) {
    throw new Error(`line ${line}: field ${name} is not a number: '${field}'`);
  }
  return value;
}

export function parseResultsCsv(text: string): SweepRow[] {
  const lines = splitLines(text);
  if (lines.length === 0 || lines[0] !== RESULTS_HEADER) {
    throw new Error(
      `results header mismatch: expected '${RESULTS_HEADER}', got '${lines[0] ?? ""}'`,
    );
  }
  return lines.slice(1).map((line, i) => {
    const n = i + 2;
    const parts = line.split(",");
    if (parts.length !== 9) {
      throw new Error(`line ${n}: expected 9 fields, got ${parts.length}`);
    }
    return {
      vessel: parts[0],
      variant: parts[1],
      axisName: parts[2],
      axisValue: num(parts[3], n, "axis_value"),
      pD: num(parts[4], n, "p_d"),
      ciLow: num(parts[5], n, "ci_low"),
      ciHigh: num(parts[6], n, "ci_high"),
      trials: num(parts[7], n, "trials"),
      masterSeed: num(parts[8], n, "master_seed"),
    };
  });
}

export function parseDesignCsv(text: string): DesignRow[] {
  const lines = splitLines(text);
  if (lines.length === 0 || lines[0] !== DESIGN_HEADER) {
    throw new Error(
      `design header mismatch: expected '${DESIGN_HEADER}', got '${lines[0] ?? ""}'`,
    );
  }
  return lines.slice(1).map((line, i) => {
    const n = i + 2;
    const parts = line.split(",");
    if (parts.length !== 7) {
      throw new Error(`line ${n}: expected 7 fields, got ${parts.length}`);
    }
    const unattainable = parts[3] === "unattainable";
    return {
      vessel: parts[0],
      radiusAn: num(parts[1], n, "a_n"),
      target: num(parts[2], n, "target"),
      estimatedN: unattainable ? null : num(parts[3], n, "N"),
      achievedPd: unattainable ? null : num(parts[4], n, "p_d"),
      trials: num(parts[5], n, "trials"),
      masterSeed: num(parts[6], n, "master_seed"),
    };
  });
}
