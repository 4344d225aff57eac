import { spawnSync } from "node:child_process";
import { existsSync, mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { RESULTS_HEADER } from "../src/csv.js";

const CLI = fileURLToPath(new URL("../dist/cli.js", import.meta.url));
const FIXTURES = fileURLToPath(new URL("../fixtures", import.meta.url));

function run(...args: string[]) {
  const res = spawnSync(process.execPath, [CLI, ...args], {
    encoding: "utf-8",
  });
  return { status: res.status, stdout: res.stdout, stderr: res.stderr };
}

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "figure-kit-"));
}

describe("figure-kit CLI", () => {
  it("renders a sweep figure and reports its shape", () => {
    const out = join(tmp(), "fig5.svg");
    const res = run("fig5", "--in", join(FIXTURES, "fig5.csv"), "--out", out);
    expect(res.stderr).toBe("");
    expect(res.status).toBe(0);
    expect(res.stdout).toBe(`wrote ${out} (1 panel(s), 2 series, 14 points)\n`);
    expect(existsSync(out)).toBe(true);
  });

  it("renders the design table and reports bar counts", () => {
    const out = join(tmp(), "table3.svg");
    const res = run(
      "table3",
      "--in",
      join(FIXTURES, "table3.csv"),
      "--out",
      out,
    );
    expect(res.status).toBe(0);
    expect(res.stdout).toBe(`wrote ${out} (1 panel(s), 18 bars)\n`);
  });

  it("rejects an unknown figure id with a usage error", () => {
    const res = run("fig9", "--in", "x.csv", "--out", "x.svg");
    expect(res.status).toBe(2);
    expect(res.stderr).toContain("unknown figure id 'fig9'");
    expect(res.stderr).toContain("fig4, fig5, fig6, fig7, fig8, table3");
  });

  it("rejects missing flags with usage text", () => {
    const res = run("fig5", "--in", "x.csv");
    expect(res.status).toBe(2);
    expect(res.stderr).toContain("usage: figure-kit");
  });

  it("rejects unknown options with usage text", () => {
    const res = run("fig5", "--in", "x.csv", "--out", "x.svg", "--nope");
    expect(res.status).toBe(2);
    expect(res.stderr).toContain("usage: figure-kit");
  });

  it("rejects extra positionals", () => {
    const res = run("fig5", "fig6", "--in", "x.csv", "--out", "x.svg");
    expect(res.status).toBe(2);
  });

  it("reports a missing input file as a render failure", () => {
    const out = join(tmp(), "fig5.svg");
    const res = run("fig5", "--in", join(tmp(), "absent.csv"), "--out", out);
    expect(res.status).toBe(1);
    expect(res.stderr).toMatch(/^error: /);
    expect(existsSync(out)).toBe(false);
  });

  it("fails on a header-only CSV without writing the output", () => {
    const dir = tmp();
    const empty = join(dir, "empty.csv");
    writeFileSync(empty, `${RESULTS_HEADER}\n`, "utf-8");
    const out = join(dir, "fig5.svg");
    const res = run("fig5", "--in", empty, "--out", out);
    expect(res.status).toBe(1);
    expect(res.stderr).toContain("no data rows");
    expect(existsSync(out)).toBe(false);
  });

  it("rejects an output extension it cannot write", () => {
    const res = run(
      "fig5",
      "--in",
      join(FIXTURES, "fig5.csv"),
      "--out",
      join(tmp(), "fig5.pdf"),
    );
    expect(res.status).toBe(1);
    expect(res.stderr).toContain("must end in .svg or .png");
  });
});
