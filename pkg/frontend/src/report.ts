import { el } from "./dom.js";
import { figureLabel, formatCf, formatFigure } from "./format.js";
import { renderHeatmap } from "./heatmap.js";
import type { Report } from "./types.js";

// Figures worth a row in the summary; the *_display fields arrive
// pre-formatted and take precedence over their numeric twins.
const FIGURE_ORDER = [
  "initial_cost_display",
  "annual_cost_display",
  "annual_benefit_display",
  "payback_display",
  "task_time_band",
  "interface_share",
  "effort_multiplier",
  "contingency_needed",
];

function statusLine(report: Report): string {
  const open = report.unresolved.length;
  if (report.status !== "complete") {
    return `Consultation in progress: ${open} question${open === 1 ? "" : "s"} open.`;
  }
  if (open) {
    return `Consultation stopped early: the verdict was already settled, ${open} question${open === 1 ? "" : "s"} never asked.`;
  }
  return "Consultation complete.";
}

/**
 * The assessment as the service reported it. The verdict strings and caveat
 * symbols are the server's bytes; nothing here re-scores anything.
 */
export function renderReport(report: Report): HTMLElement {
  const root = el("section", { class: "report", "data-role": "report" });

  root.append(
    el("h2", {}, `Feasibility assessment`),
    el("p", { class: "kb-line" }, `${report.kb.name} ${report.kb.version}`),
    el(
      "p",
      { class: "overall" },
      "Overall verdict: ",
      el("strong", { class: "verdict-text", "data-role": "verdict" }, report.verdict),
      el("span", { class: "overall-cf" }, ` (certainty ${formatCf(report.cf)})`),
    ),
    el("p", { class: "status-line" }, statusLine(report)),
  );

  const dims = el("table", { class: "dimensions" });
  dims.append(
    el(
      "tr",
      {},
      el("th", {}, "dimension"),
      el("th", {}, "verdict"),
      el("th", {}, "certainty"),
      el("th", {}, "caveats"),
      el("th", {}, "pending"),
    ),
  );
  for (const dim of report.dimensions) {
    dims.append(
      el(
        "tr",
        { "data-dimension": dim.dimension },
        el("td", {}, dim.dimension),
        el("td", { class: "verdict-text", "data-role": "dimension-verdict" }, dim.verdict),
        el("td", {}, formatCf(dim.cf)),
        el("td", {}, dim.caveats.map((c) => c.symbol).join(", ")),
        el("td", {}, String(dim.pending.length)),
      ),
    );
  }
  root.append(el("h3", {}, "Dimensions"), dims);

  if (report.caveats.length) {
    const list = el("ul", { class: "caveats", "data-role": "caveats" });
    for (const caveat of report.caveats) {
      const item = el(
        "li",
        { class: "caveat" },
        el("span", { class: "caveat-symbol", "data-role": "caveat-symbol" }, caveat.symbol),
        el("span", { class: "caveat-meta" }, ` (${caveat.dimension}, cf ${formatCf(caveat.cf)})`),
      );
      for (const rule of caveat.rules) {
        const citation = report.rule_citations[rule];
        if (citation) item.append(el("blockquote", { class: "citation" }, citation));
      }
      list.append(item);
    }
    root.append(el("h3", {}, "Caveats"), list);
  }

  const figureKeys = FIGURE_ORDER.filter((k) => k in report.figures);
  if (figureKeys.length) {
    const grid = el("dl", { class: "figures" });
    for (const key of figureKeys) {
      grid.append(
        el("dt", {}, figureLabel(key)),
        el("dd", { "data-figure": key }, formatFigure(key, report.figures[key])),
      );
    }
    root.append(el("h3", {}, "Figures"), grid);
  }

  if (report.risk_register.length) {
    root.append(el("h3", {}, "Risk register"), renderHeatmap(report.risk_register));
  }

  if (report.unresolved.length) {
    const list = el("ul", { class: "unresolved", "data-role": "unresolved" });
    for (const item of report.unresolved) {
      list.append(
        el(
          "li",
          { "data-attribute": item.attribute },
          el("span", { class: "unresolved-prompt" }, item.prompt),
          el("span", { class: "unresolved-meta" }, ` (${item.attribute}, ${item.dimension})`),
        ),
      );
    }
    root.append(el("h3", {}, "Unresolved questions"), list);
  }

  for (const note of report.notes) {
    root.append(el("p", { class: "note" }, note));
  }

  return root;
}
