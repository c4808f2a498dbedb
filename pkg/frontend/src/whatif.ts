import { el } from "./dom.js";
import { figureLabel, formatCf, formatFigure } from "./format.js";
import type { WhatIfOut } from "./types.js";

export interface WhatIfState {
  overrides: Record<string, unknown>;
  result: WhatIfOut | null;
  error: string | null;
}

export interface WhatIfHandlers {
  onOverride(attribute: string, value: unknown): void;
  onClear(): void;
}

// Levers worth a dedicated control. Everything else can be typed into the
// free-form override field.
const MONEY_FIELDS: Array<[string, string]> = [
  ["dev_effort_months", "Development effort (months)"],
  ["salary_rate", "Developer cost (GBP/year)"],
  ["annual_benefit", "Annual benefit (GBP)"],
];

function sideCard(title: string, side: WhatIfOut["baseline"], role: string): HTMLElement {
  const card = el("div", { class: "whatif-side", "data-role": role });
  card.append(
    el("h4", {}, title),
    el(
      "p",
      {},
      "Verdict: ",
      el("strong", { class: "verdict-text", "data-role": `${role}-verdict` }, side.verdict),
      el("span", {}, ` (certainty ${formatCf(side.cf)})`),
    ),
  );
  const dl = el("dl", { class: "figures" });
  for (const key of ["payback_display", "initial_cost_display", "annual_cost_display", "effort_multiplier"]) {
    if (key in side.figures) {
      dl.append(
        el("dt", {}, figureLabel(key)),
        el("dd", { "data-figure": key }, formatFigure(key, side.figures[key])),
      );
    }
  }
  card.append(dl);
  return card;
}

/**
 * Explore overrides against a settled baseline. Every number shown comes
 * from the whatif endpoint; the stored session is never touched.
 */
export function renderWhatIf(state: WhatIfState, handlers: WhatIfHandlers): HTMLElement {
  const root = el("section", { class: "whatif", "data-role": "whatif" });
  root.append(el("h3", {}, "What if?"));

  const controls = el("div", { class: "whatif-controls" });

  const coverageValue =
    typeof state.overrides["target_coverage"] === "number"
      ? (state.overrides["target_coverage"] as number)
      : 0.8;
  const slider = el("input", {
    type: "range",
    min: "0.8",
    max: "1.0",
    step: "0.05",
    value: String(coverageValue),
    "data-role": "coverage-slider",
  }) as HTMLInputElement;
  const sliderLabel = el("span", { class: "slider-value", "data-role": "coverage-value" }, coverageValue.toFixed(2));
  slider.addEventListener("input", () => {
    sliderLabel.textContent = Number(slider.value).toFixed(2);
  });
  slider.addEventListener("change", () => {
    handlers.onOverride("target_coverage", Number(slider.value));
  });
  controls.append(el("label", { class: "control" }, "Target coverage ", slider, " ", sliderLabel));

  const minutes = el("input", { type: "number", step: "any", "data-role": "expert-minutes" }) as HTMLInputElement;
  minutes.addEventListener("change", () => {
    const parsed = Number(minutes.value);
    if (minutes.value.trim() !== "" && Number.isFinite(parsed)) {
      handlers.onOverride("expert_task_minutes", parsed);
    }
  });
  controls.append(el("label", { class: "control" }, "Expert task time (minutes) ", minutes));

  const profile = el("select", { "data-role": "interface-profile" }) as HTMLSelectElement;
  profile.append(
    el("option", { value: "" }, "(leave as answered)"),
    el("option", { value: "embedded_or_simple" }, "embedded_or_simple"),
    el("option", { value: "multiple_or_impressive" }, "multiple_or_impressive"),
  );
  profile.addEventListener("change", () => {
    if (profile.value) handlers.onOverride("interface_profile", profile.value);
  });
  controls.append(el("label", { class: "control" }, "Interface profile ", profile));

  for (const [attribute, label] of MONEY_FIELDS) {
    const input = el("input", { type: "number", step: "any", "data-attribute": attribute }) as HTMLInputElement;
    input.addEventListener("change", () => {
      const parsed = Number(input.value);
      if (input.value.trim() !== "" && Number.isFinite(parsed)) {
        handlers.onOverride(attribute, parsed);
      }
    });
    controls.append(el("label", { class: "control" }, `${label} `, input));
  }

  const clear = el("button", { type: "button", "data-role": "clear-overrides" }, "Clear overrides");
  clear.addEventListener("click", () => handlers.onClear());
  controls.append(clear);
  root.append(controls);

  if (state.error) {
    root.append(el("p", { class: "inline-error", "data-role": "whatif-error" }, state.error));
  }

  if (state.result) {
    const changedKeys = Object.keys(state.result.changed);
    if (!changedKeys.length) {
      root.append(
        el(
          "p",
          { class: "zero-delta", "data-role": "zero-delta" },
          "No overrides set. The variant matches the baseline.",
        ),
      );
    }
    root.append(
      el(
        "div",
        { class: "whatif-sides" },
        sideCard("Baseline", state.result.baseline, "baseline"),
        sideCard("With overrides", state.result.variant, "variant"),
      ),
    );
    if (changedKeys.length) {
      const table = el("table", { class: "delta", "data-role": "delta" });
      table.append(el("tr", {}, el("th", {}, "what moved"), el("th", {}, "before"), el("th", {}, "after")));
      for (const key of changedKeys) {
        const delta = state.result.changed[key];
        if (!delta) continue;
        table.append(
          el(
            "tr",
            { "data-changed": key },
            el("td", {}, figureLabel(key)),
            el("td", { "data-role": "before" }, formatFigure(key, delta.before)),
            el("td", { "data-role": "after" }, formatFigure(key, delta.after)),
          ),
        );
      }
      root.append(table);
    }
  }

  return root;
}
