import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import { CSV_HEADER, parseEnergyCsv } from "../src/csv.js";

const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));
const mumag1 = readFileSync(`${FIXTURES}/mumag1.csv`, "utf8");

function lines(n: number): string {
  const rows = [CSV_HEADER];
  for (let i = 0; i < n; i++) {
    rows.push(`${i * 0.1},1,2,3,6,0,0,0,6,1e-16,1e-17`);
  }
  return rows.join("\n") + "\n";
}

describe("parseEnergyCsv", () => {
  it("parses a full simulation log", () => {
    const records = parseEnergyCsv(mumag1);
    expect(records.length).toBe(101);
    expect(records[0].t).toBe(0);
    for (let i = 1; i < records.length; i++) {
      expect(records[i].t).toBeGreaterThan(records[i - 1].t);
    }
    for (const r of records) {
      expect(r.total).toBeCloseTo(r.exch + r.h_l2 + r.h_curl, 12);
      expect(Number.isFinite(r.lhs_total)).toBe(true);
    }
  });

  it("accepts the two-row minimum and trailing newline variants", () => {
    expect(parseEnergyCsv(lines(2)).length).toBe(2);
    expect(parseEnergyCsv(lines(2).trimEnd()).length).toBe(2);
    expect(parseEnergyCsv(lines(2).replace(/\n/g, "\r\n")).length).toBe(2);
  });

  it("rejects an empty file", () => {
    expect(() => parseEnergyCsv("")).toThrow("empty energy log");
    expect(() => parseEnergyCsv("\n\n")).toThrow("empty energy log");
  });

  it("rejects a wrong header and names line 1", () => {
    expect(() => parseEnergyCsv("a,b,c\n1,2,3\n")).toThrow(/line 1: unexpected header/);
  });

  it("names the offending line on a short row", () => {
    const bad = lines(3).replace("0.2,1,2,3,6,0,0,0,6,1e-16,1e-17", "0.2,1,2");
    expect(() => parseEnergyCsv(bad)).toThrow("line 4: expected 11 fields, got 3");
  });

  it("names the offending line and column on a non-number", () => {
    const bad = lines(3).replace("0.1,1,2", "0.1,oops,2");
    expect(() => parseEnergyCsv(bad)).toThrow(
      'line 3: non-numeric value "oops" in column exch',
    );
  });

  it("rejects a non-increasing time column", () => {
    const bad = lines(3).replace("0.2,1,2", "0.1,1,2");
    expect(() => parseEnergyCsv(bad)).toThrow(
      /line 4: time column is not strictly increasing/,
    );
  });

  it("requires at least two data rows", () => {
    expect(() => parseEnergyCsv(lines(1))).toThrow("need at least 2 data rows, got 1");
  });
});
