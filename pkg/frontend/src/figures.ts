/**
 * Figure definitions for the energy log.
 *
 * The CSV stores squared seminorms; the figures plot their square roots,
 * plus the combined total that the decoupled scheme keeps bounded.
 */

import { EnergyRecord } from "./csv.js";
import { Series, buildChart } from "./svg.js";

export interface EnergyCurves {
  t: number[];
  exchange: number[];
  field: number[];
  total: number[];
}

/** Square-root energy curves against time. */
export function energySeries(records: EnergyRecord[]): EnergyCurves {
  const t = records.map((r) => r.t);
  const exchange = records.map((r) => Math.sqrt(r.exch));
  const field = records.map((r) => Math.sqrt(r.h_l2));
  const total = records.map(
    (r) => Math.sqrt(r.exch) + Math.sqrt(r.h_l2) + Math.sqrt(r.h_curl),
  );
  return { t, exchange, field, total };
}

export function energyFigure(
  records: EnergyRecord[],
  opts: { logScale?: boolean } = {},
): string {
  const c = energySeries(records);
  const series: Series[] = [
    { label: "exchange |∇m|", color: "#4361ee", values: c.exchange },
    { label: "field |H|", color: "#e63946", values: c.field },
    { label: "total (exchange + field + curl)", color: "#2a9d8f", values: c.total, dash: "5 3" },
  ];
  return buildChart({
    title: "Energy norms over time",
    xLabel: "t (dimensionless)",
    yLabel: opts.logScale ? "energy norm (log)" : "energy norm",
    x: c.t,
    series,
    logY: Boolean(opts.logScale),
  });
}

export function diagnosticsFigure(records: EnergyRecord[]): string {
  const t = records.map((r) => r.t);
  const series: Series[] = [
    {
      label: "max |1 - |m|| per node",
      color: "#6a4c93",
      values: records.map((r) => r.unit_violation_max),
    },
    {
      label: "max |v · m| per node",
      color: "#f77f00",
      values: records.map((r) => r.tangency_max),
      dash: "5 3",
    },
  ];
  return buildChart({
    title: "Constraint diagnostics",
    xLabel: "t (dimensionless)",
    yLabel: "violation (log)",
    x: t,
    series,
    logY: true,
  });
}
