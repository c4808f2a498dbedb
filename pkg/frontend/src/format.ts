// Presentation of figure values the service sends as raw numbers. Strings
// (the *_display fields, bands) pass through untouched.

const FIGURE_LABELS: Record<string, string> = {
  initial_cost_estimate: "Initial cost",
  annual_cost_estimate: "Annual cost",
  annual_benefit: "Annual benefit",
  payback_months_est: "Payback (months)",
  task_time_band: "Task time band",
  interface_share: "Interface share of effort",
  effort_multiplier: "Coverage effort multiplier",
  contingency_needed: "Contingency plan needed",
  initial_cost_display: "Initial cost",
  annual_cost_display: "Annual cost",
  annual_benefit_display: "Annual benefit",
  payback_display: "Payback",
};

export function figureLabel(key: string): string {
  return FIGURE_LABELS[key] ?? key;
}

export function formatFigure(key: string, value: unknown): string {
  if (value === null || value === undefined) return "unknown";
  if (typeof value === "string") return value;
  if (Array.isArray(value)) return value.map((v) => formatFigure(key, v)).join(", ");
  if (typeof value === "boolean") return value ? "yes" : "no";
  if (typeof value === "number") {
    if (key === "effort_multiplier") return value.toFixed(1);
    if (key === "interface_share") return value.toFixed(2);
    if (key === "payback_months_est") return value.toFixed(2);
    if (Number.isInteger(value)) return String(value);
    return value.toFixed(2);
  }
  return String(value);
}

export function formatCf(cf: number): string {
  return cf.toFixed(2);
}

export function formatAnswerValue(value: unknown): string {
  if (value === null || value === undefined) return "unknown";
  if (value === true) return "yes";
  if (value === false) return "no";
  return String(value);
}
