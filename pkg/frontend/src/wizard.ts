import { el } from "./dom.js";
import { formatAnswerValue } from "./format.js";
import type { Question } from "./types.js";

export interface HistoryEntry {
  attribute: string;
  value: unknown;
  cf: number;
}

export interface WizardState {
  status: "in_progress" | "complete";
  question: Question | null;
  history: HistoryEntry[];
  /** attribute being re-answered via back-navigation, if any */
  editing: string | null;
  /** message from a rejected answer (422); the answer was not recorded */
  inlineError: string | null;
  /** set when the service was unreachable; shows the retry banner */
  networkError: string | null;
}

export interface WizardHandlers {
  onSubmit(attribute: string, value: unknown, cf: number): void;
  onUnknown(attribute: string): void;
  onWhy(attribute: string): void;
  onEdit(attribute: string): void;
  onEditCancel(): void;
  onRetry(): void;
}

/**
 * Turn typed-in text into an answer value. The service owns validation;
 * this only maps the obvious literal forms. Unparseable text goes through
 * as-is so the server's 422 explains what was wrong.
 */
export function parseAnswerText(text: string): unknown {
  const trimmed = text.trim();
  if (trimmed === "" || trimmed.toLowerCase() === "unknown") return null;
  if (trimmed === "yes") return true;
  if (trimmed === "no") return false;
  const num = Number(trimmed);
  if (Number.isFinite(num) && trimmed !== "") return num;
  return trimmed;
}

const CF_CHOICES: Array<[string, string]> = [
  ["1.0", "certain (1.0)"],
  ["0.8", "confident (0.8)"],
  ["0.6", "probable (0.6)"],
  ["0.4", "tentative (0.4)"],
];

function cfSelect(): HTMLSelectElement {
  const select = el("select", { class: "cf-select", "data-role": "cf" });
  for (const [value, label] of CF_CHOICES) {
    select.append(el("option", { value }, label));
  }
  return select;
}

function answerControl(question: Question): { node: HTMLElement; read: () => unknown } {
  if (question.kind === "bool") {
    const yes = el("input", { type: "radio", name: "answer-value", value: "yes", id: "ans-yes" });
    const no = el("input", { type: "radio", name: "answer-value", value: "no", id: "ans-no" });
    const node = el(
      "div",
      { class: "answer-control bool" },
      el("label", { for: "ans-yes" }, yes, " yes"),
      el("label", { for: "ans-no" }, no, " no"),
    );
    return {
      node,
      read: () => ((yes as HTMLInputElement).checked ? true : (no as HTMLInputElement).checked ? false : null),
    };
  }
  if (question.kind === "enum") {
    const select = el("select", { class: "answer-control enum", "data-role": "value" });
    for (const value of question.values) {
      select.append(el("option", { value }, value));
    }
    return { node: select, read: () => (select as HTMLSelectElement).value };
  }
  if (question.kind === "number") {
    const input = el("input", {
      type: "number",
      step: "any",
      class: "answer-control number",
      "data-role": "value",
    }) as HTMLInputElement;
    const node = question.unit
      ? el("div", { class: "with-unit" }, input, el("span", { class: "unit" }, ` ${question.unit}`))
      : input;
    return {
      node,
      read: () => {
        const raw = input.value.trim();
        const parsed = Number(raw);
        // hand unparseable text to the server so its 422 does the explaining
        return raw !== "" && Number.isFinite(parsed) ? parsed : raw;
      },
    };
  }
  const input = el("input", { type: "text", class: "answer-control text", "data-role": "value" }) as HTMLInputElement;
  return { node: input, read: () => input.value };
}

function questionCard(question: Question, state: WizardState, handlers: WizardHandlers): HTMLElement {
  const card = el("div", { class: "question-card", "data-role": "question", "data-attribute": question.attribute });
  card.append(
    el("span", { class: "dimension-tag" }, question.dimension),
    el("p", { class: "prompt" }, question.prompt),
  );
  const control = answerControl(question);
  card.append(control.node);

  const cf = cfSelect();
  card.append(el("label", { class: "cf-label" }, "certainty ", cf));

  if (state.inlineError) {
    card.append(el("p", { class: "inline-error", "data-role": "inline-error" }, state.inlineError));
  }

  const submit = el("button", { type: "button", "data-role": "submit" }, "Answer");
  submit.addEventListener("click", () => {
    handlers.onSubmit(question.attribute, control.read(), Number(cf.value));
  });
  const unknown = el("button", { type: "button", "data-role": "unknown" }, "Don't know");
  unknown.addEventListener("click", () => handlers.onUnknown(question.attribute));
  const why = el("button", { type: "button", "data-role": "why" }, "Why is this asked?");
  why.addEventListener("click", () => handlers.onWhy(question.attribute));

  card.append(el("div", { class: "actions" }, submit, unknown, why));
  return card;
}

function editCard(attribute: string, current: HistoryEntry | undefined, handlers: WizardHandlers): HTMLElement {
  const card = el("div", { class: "edit-card", "data-role": "edit", "data-attribute": attribute });
  card.append(el("p", { class: "prompt" }, `Change answer for ${attribute}`));
  const input = el("input", { type: "text", "data-role": "edit-value" }) as HTMLInputElement;
  if (current) input.value = formatAnswerValue(current.value);
  const cf = cfSelect();
  const save = el("button", { type: "button", "data-role": "edit-save" }, "Save");
  save.addEventListener("click", () => {
    handlers.onSubmit(attribute, parseAnswerText(input.value), Number(cf.value));
  });
  const cancel = el("button", { type: "button", "data-role": "edit-cancel" }, "Cancel");
  cancel.addEventListener("click", () => handlers.onEditCancel());
  card.append(input, el("label", { class: "cf-label" }, "certainty ", cf), save, cancel);
  return card;
}

function historyList(state: WizardState, handlers: WizardHandlers): HTMLElement {
  const section = el("section", { class: "history", "data-role": "history" });
  if (!state.history.length) return section;
  section.append(el("h3", {}, "Answers so far"));
  const list = el("ol", {});
  for (const entry of state.history) {
    const item = el(
      "li",
      { "data-attribute": entry.attribute },
      el("span", { class: "history-line" }, `${entry.attribute}: ${formatAnswerValue(entry.value)} (cf ${entry.cf})`),
    );
    const change = el("button", { type: "button", "data-role": "reanswer" }, "change");
    change.addEventListener("click", () => handlers.onEdit(entry.attribute));
    item.append(" ", change);
    list.append(item);
  }
  section.append(list);
  return section;
}

/** The consultation flow: one server-chosen question at a time. */
export function renderWizard(state: WizardState, handlers: WizardHandlers): HTMLElement {
  const root = el("section", { class: "wizard", "data-role": "wizard" });

  if (state.networkError) {
    const banner = el(
      "div",
      { class: "retry-banner", "data-role": "retry-banner" },
      el("span", {}, state.networkError),
    );
    const retry = el("button", { type: "button", "data-role": "retry" }, "Retry");
    retry.addEventListener("click", () => handlers.onRetry());
    banner.append(" ", retry);
    root.append(banner);
  }

  if (state.editing) {
    root.append(
      editCard(
        state.editing,
        state.history.find((h) => h.attribute === state.editing),
        handlers,
      ),
    );
  } else if (state.status === "complete" || state.question === null) {
    root.append(
      el(
        "p",
        { class: "wizard-done", "data-role": "wizard-done" },
        "No further questions. The assessment below is final for the answers given.",
      ),
    );
  } else {
    root.append(questionCard(state.question, state, handlers));
  }

  root.append(historyList(state, handlers));
  return root;
}
