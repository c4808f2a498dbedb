import { ApiClient, ApiError, NetworkError } from "./api.js";
import { clear, el } from "./dom.js";
import { renderHowPane, renderWhyPane } from "./explain.js";
import { renderReport } from "./report.js";
import type { HowOut, Question, Report, SessionState, WhyOut } from "./types.js";
import { renderWizard, type HistoryEntry, type WizardState } from "./wizard.js";
import { renderWhatIf, type WhatIfState } from "./whatif.js";

interface AppState {
  sessionId: string | null;
  status: "in_progress" | "complete";
  question: Question | null;
  history: HistoryEntry[];
  editing: string | null;
  inlineError: string | null;
  networkError: string | null;
  why: WhyOut | null;
  how: HowOut | null;
  report: Report | null;
  whatif: WhatIfState;
  fixtures: string[];
}

function freshState(): AppState {
  return {
    sessionId: null,
    status: "in_progress",
    question: null,
    history: [],
    editing: null,
    inlineError: null,
    networkError: null,
    why: null,
    how: null,
    report: null,
    whatif: { overrides: {}, result: null, error: null },
    fixtures: [],
  };
}

/**
 * One consultation, mirrored from the server. Every mutation is a round
 * trip: state is only ever rebuilt from API responses, and a failed call
 * leaves the previous state standing (plus an error notice).
 */
export class App {
  readonly state: AppState = freshState();
  private retryThunk: (() => Promise<void>) | null = null;

  constructor(
    private readonly client: ApiClient,
    private readonly root: HTMLElement,
  ) {}

  /** Restore from the URL hash if it names a session, else show the landing page. */
  async boot(): Promise<void> {
    try {
      const meta = await this.client.kbMeta();
      this.state.fixtures = meta.fixtures;
    } catch {
      // landing still renders; fixture list just stays empty
    }
    const match = /#\/s\/([A-Za-z0-9]+)/.exec(window.location.hash);
    if (match && match[1]) {
      this.state.sessionId = match[1];
      await this.guard(() => this.refreshFromServer());
    }
    this.render();
  }

  private setSessionHash(id: string): void {
    window.location.hash = `#/s/${id}`;
  }

  /** Run an API call; map failures to UI notices without touching state. */
  private async guard(action: () => Promise<void>): Promise<boolean> {
    try {
      await action();
      this.state.networkError = null;
      this.retryThunk = null;
      return true;
    } catch (err) {
      if (err instanceof NetworkError) {
        this.state.networkError = err.message;
        this.retryThunk = action;
      } else if (err instanceof ApiError) {
        this.state.inlineError = err.message;
      } else {
        throw err;
      }
      return false;
    }
  }

  private applySessionState(state: SessionState): void {
    this.state.sessionId = state.session_id;
    this.state.status = state.status;
    this.state.question = state.next_question;
    if (state.answers) {
      this.state.history = Object.entries(state.answers).map(([attribute, a]) => ({
        attribute,
        value: a.value,
        cf: a.cf,
      }));
    }
  }

  /** Rebuild everything the page shows from the API alone. */
  private async refreshFromServer(): Promise<void> {
    if (!this.state.sessionId) return;
    const state = await this.client.session(this.state.sessionId);
    this.applySessionState(state);
    this.state.report = await this.client.report(this.state.sessionId);
  }

  async start(fixture?: string): Promise<void> {
    await this.guard(async () => {
      const created = await this.client.createSession(fixture ? { fixture } : {});
      this.state.sessionId = created.session_id;
      this.setSessionHash(created.session_id);
      await this.refreshFromServer();
    });
    this.render();
  }

  async submitAnswer(attribute: string, value: unknown, cf: number): Promise<void> {
    if (!this.state.sessionId) return;
    this.state.inlineError = null;
    const ok = await this.guard(async () => {
      // no optimistic update: state changes only once the server acknowledges
      const ack = await this.client.answer(this.state.sessionId!, attribute, value, cf);
      const entry: HistoryEntry = {
        attribute: ack.recorded.attribute,
        value: ack.recorded.value,
        cf: ack.recorded.cf,
      };
      const existing = this.state.history.findIndex((h) => h.attribute === entry.attribute);
      if (existing >= 0) this.state.history[existing] = entry;
      else this.state.history.push(entry);
      this.state.status = ack.status;
      this.state.question = ack.next_question;
      this.state.editing = null;
      this.state.why = null;
      this.state.report = await this.client.report(this.state.sessionId!);
    });
    if (!ok && this.state.editing === null && this.state.networkError === null) {
      // rejected answer: stay on the same question with the inline message
    }
    this.render();
  }

  async markUnknown(attribute: string): Promise<void> {
    await this.submitAnswer(attribute, null, 1.0);
  }

  async showWhy(attribute: string): Promise<void> {
    if (!this.state.sessionId) return;
    await this.guard(async () => {
      this.state.why = await this.client.explainWhy(this.state.sessionId!, attribute);
    });
    this.render();
  }

  async showHow(attribute: string): Promise<void> {
    if (!this.state.sessionId) return;
    await this.guard(async () => {
      this.state.how = await this.client.explainHow(this.state.sessionId!, attribute);
    });
    this.render();
  }

  beginEdit(attribute: string): void {
    this.state.editing = attribute;
    this.state.inlineError = null;
    this.render();
  }

  cancelEdit(): void {
    this.state.editing = null;
    this.render();
  }

  async setOverride(attribute: string, value: unknown): Promise<void> {
    this.state.whatif.overrides[attribute] = value;
    await this.runWhatif();
  }

  async clearOverrides(): Promise<void> {
    this.state.whatif.overrides = {};
    await this.runWhatif();
  }

  async runWhatif(): Promise<void> {
    if (!this.state.sessionId) return;
    this.state.whatif.error = null;
    try {
      this.state.whatif.result = await this.client.whatif(this.state.sessionId, this.state.whatif.overrides);
    } catch (err) {
      if (err instanceof ApiError || err instanceof NetworkError) {
        this.state.whatif.error = err.message;
      } else {
        throw err;
      }
    }
    this.render();
  }

  async retry(): Promise<void> {
    const thunk = this.retryThunk;
    if (!thunk) return;
    await this.guard(thunk);
    this.render();
  }

  render(): void {
    clear(this.root);
    this.root.append(el("h1", {}, "Feasibility screening"));

    if (!this.state.sessionId) {
      this.root.append(this.renderLanding());
      return;
    }

    const wizardState: WizardState = {
      status: this.state.status,
      question: this.state.question,
      history: this.state.history,
      editing: this.state.editing,
      inlineError: this.state.inlineError,
      networkError: this.state.networkError,
    };
    this.root.append(
      renderWizard(wizardState, {
        onSubmit: (a, v, cf) => void this.submitAnswer(a, v, cf),
        onUnknown: (a) => void this.markUnknown(a),
        onWhy: (a) => void this.showWhy(a),
        onEdit: (a) => this.beginEdit(a),
        onEditCancel: () => this.cancelEdit(),
        onRetry: () => void this.retry(),
      }),
    );

    if (this.state.why) {
      this.root.append(renderWhyPane(this.state.why.attribute, this.state.why.chain));
    }

    this.root.append(this.renderExplainControl());
    if (this.state.how) {
      this.root.append(renderHowPane(this.state.how.attribute, this.state.how.proofs));
    }

    this.root.append(
      renderWhatIf(this.state.whatif, {
        onOverride: (a, v) => void this.setOverride(a, v),
        onClear: () => void this.clearOverrides(),
      }),
    );

    if (this.state.report) {
      this.root.append(renderReport(this.state.report));
    }
  }

  private renderLanding(): HTMLElement {
    const landing = el("section", { class: "landing", "data-role": "landing" });
    const fresh = el("button", { type: "button", "data-role": "start-fresh" }, "Start consultation");
    fresh.addEventListener("click", () => void this.start());
    landing.append(el("p", {}, "Screen a proposed knowledge-based system for feasibility."), fresh);

    if (this.state.fixtures.length) {
      const select = el("select", { "data-role": "fixture-select" }) as HTMLSelectElement;
      for (const name of this.state.fixtures) select.append(el("option", { value: name }, name));
      const load = el("button", { type: "button", "data-role": "start-fixture" }, "Load case study");
      load.addEventListener("click", () => void this.start(select.value));
      landing.append(el("p", {}, "Or replay a recorded case study: ", select, " ", load));
    }
    return landing;
  }

  private renderExplainControl(): HTMLElement {
    const box = el("div", { class: "explain-control" });
    const input = el("input", {
      type: "text",
      placeholder: "attribute, e.g. initial_cost_estimate",
      "data-role": "how-attribute",
    }) as HTMLInputElement;
    const button = el("button", { type: "button", "data-role": "how-button" }, "How was it derived?");
    button.addEventListener("click", () => {
      if (input.value.trim()) void this.showHow(input.value.trim());
    });
    box.append(input, " ", button);
    return box;
  }
}
