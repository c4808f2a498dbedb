import { el } from "./dom.js";
import type { RiskRow } from "./types.js";

const LEVELS = ["low", "medium", "high"] as const;

function isSeriousCell(likelihood: string, impact: string): boolean {
  return likelihood !== "low" && impact !== "low";
}

/**
 * Static 3x3 grid, likelihood across, impact down (worst row on top).
 * Cells where both levels are at least medium carry the serious class.
 */
export function renderHeatmap(rows: RiskRow[]): HTMLElement {
  const table = el("table", { class: "risk-heatmap", "data-role": "risk-heatmap" });
  const head = el("tr", {}, el("th", {}, "impact \\ likelihood"));
  for (const level of LEVELS) head.append(el("th", { scope: "col" }, level));
  table.append(head);

  for (const impact of [...LEVELS].reverse()) {
    const tr = el("tr", {}, el("th", { scope: "row" }, impact));
    for (const likelihood of LEVELS) {
      const serious = isSeriousCell(likelihood, impact);
      const cell = el("td", {
        class: serious ? "risk-cell serious" : "risk-cell",
        "data-likelihood": likelihood,
        "data-impact": impact,
      });
      for (const row of rows) {
        if (row.likelihood === likelihood && row.impact === impact) {
          cell.append(el("span", { class: "risk-name", "data-risk": row.risk }, row.risk));
        }
      }
      tr.append(cell);
    }
    table.append(tr);
  }
  return table;
}
