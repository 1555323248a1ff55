/**
 * Parser for the simulator's energy log.
 *
 * The CSV schema is the contract between the simulator and this package:
 * a pinned 11-column header, one row per time step, floats with enough
 * digits to round-trip.  Anything off-schema is rejected with a message
 * naming the offending line.
 */

export const CSV_HEADER =
  "t,exch,h_l2,h_curl,total,v_accum,dtH_accum,curl_accum," +
  "lhs_total,unit_violation_max,tangency_max";

export const COLUMNS = CSV_HEADER.split(",");

export interface EnergyRecord {
  t: number;
  exch: number;
  h_l2: number;
  h_curl: number;
  total: number;
  v_accum: number;
  dtH_accum: number;
  curl_accum: number;
  lhs_total: number;
  unit_violation_max: number;
  tangency_max: number;
}

/** Parse and validate the energy log; throws on any malformed content. */
export function parseEnergyCsv(text: string): EnergyRecord[] {
  const lines = text.split(/\r?\n/);
  while (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }
  if (lines.length === 0) {
    throw new Error("empty energy log");
  }
  if (lines[0] !== CSV_HEADER) {
    throw new Error(
      `line 1: unexpected header "${lines[0]}" (want "${CSV_HEADER}")`,
    );
  }

  const records: EnergyRecord[] = [];
  for (let i = 1; i < lines.length; i++) {
    const lineNo = i + 1;
    const fields = lines[i].split(",");
    if (fields.length !== COLUMNS.length) {
      throw new Error(
        `line ${lineNo}: expected ${COLUMNS.length} fields, got ${fields.length}`,
      );
    }
    const rec = {} as Record<string, number>;
    for (let c = 0; c < COLUMNS.length; c++) {
      const value = Number(fields[c]);
      if (fields[c].trim() === "" || !Number.isFinite(value)) {
        throw new Error(
          `line ${lineNo}: non-numeric value "${fields[c]}" in column ${COLUMNS[c]}`,
        );
      }
      rec[COLUMNS[c]] = value;
    }
    const record = rec as unknown as EnergyRecord;
    if (records.length > 0 && record.t <= records[records.length - 1].t) {
      throw new Error(
        `line ${lineNo}: time column is not strictly increasing (${record.t})`,
      );
    }
    records.push(record);
  }

  if (records.length < 2) {
    throw new Error(`need at least 2 data rows, got ${records.length}`);
  }
  return records;
}
