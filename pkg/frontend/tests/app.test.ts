import { beforeEach, describe, expect, it, vi } from "vitest";
import { ApiClient } from "../src/api.js";
import { App } from "../src/app.js";
import kbMeta from "./fixtures/kb_meta.json";
import freshSession from "./fixtures/fresh_session.json";
import sessionState from "./fixtures/session_state.json";
import answerAck from "./fixtures/answer_ack.json";
import invalidAnswer from "./fixtures/invalid_answer_422.json";
import whyFixture from "./fixtures/why_first_question.json";
import thyroidReport from "./fixtures/thyroid_report.json";
import whatifCoverage from "./fixtures/thyroid_whatif_coverage.json";

type Route = (init?: RequestInit) => Response | Promise<Response>;

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), { status, headers: { "content-type": "application/json" } });
}

/** Fake service: routes keyed by "METHOD regex", first match wins. */
function fakeServer(routes: Array<[string, RegExp, Route]>) {
  const calls: Array<{ method: string; url: string; body: unknown }> = [];
  const fetchMock = vi.fn(async (url: string, init?: RequestInit) => {
    const method = init?.method ?? "GET";
    calls.push({ method, url, body: init?.body ? JSON.parse(init.body as string) : undefined });
    for (const [routeMethod, pattern, handler] of routes) {
      if (routeMethod === method && pattern.test(url)) return handler(init);
    }
    return jsonResponse({ code: "not_found", message: `no route for ${method} ${url}`, detail: null }, 404);
  });
  vi.stubGlobal("fetch", fetchMock);
  return calls;
}

function standardRoutes(): Array<[string, RegExp, Route]> {
  return [
    ["GET", /\/kb\/meta$/, () => jsonResponse(kbMeta)],
    ["POST", /\/sessions$/, () => jsonResponse(freshSession, 201)],
    ["GET", /\/sessions\/[^/]+$/, () => jsonResponse(sessionState)],
    ["GET", /\/report\?format=json$/, () => jsonResponse(thyroidReport)],
    ["POST", /\/answers$/, () => jsonResponse(answerAck)],
    ["GET", /mode=why/, () => jsonResponse(whyFixture)],
    ["POST", /\/whatif$/, () => jsonResponse(whatifCoverage)],
  ];
}

async function settled(): Promise<void> {
  // let queued promise chains finish
  for (let i = 0; i < 10; i++) await Promise.resolve();
}

let root: HTMLElement;

beforeEach(() => {
  vi.unstubAllGlobals();
  window.location.hash = "";
  document.body.innerHTML = "";
  root = document.createElement("div");
  document.body.append(root);
});

describe("landing", () => {
  it("offers a fresh start and the recorded case studies", async () => {
    fakeServer(standardRoutes());
    const app = new App(new ApiClient(), root);
    await app.boot();
    expect(root.querySelector('[data-role="start-fresh"]')).not.toBeNull();
    const options = [...root.querySelectorAll('[data-role="fixture-select"] option')].map((o) => o.textContent);
    expect(options).toEqual(["icl", "savings_bank", "thyroid"]);
  });
});

describe("starting a consultation", () => {
  it("creates the session, stores its id in the hash, and mirrors server state", async () => {
    const calls = fakeServer(standardRoutes());
    const app = new App(new ApiClient(), root);
    await app.start();
    expect(calls.some((c) => c.method === "POST" && /\/sessions$/.test(c.url))).toBe(true);
    expect(window.location.hash).toBe("#/s/93ad06eccc7e");
    // state came from the follow-up GET, not from local bookkeeping
    expect(app.state.question?.attribute).toBe("expertise_needed_in_places");
    expect(app.state.history).toEqual([{ attribute: "expertise_scarce", value: true, cf: 1.0 }]);
    expect(root.querySelector(".prompt")?.textContent).toBe(
      "Is the same expertise needed in several places at once?",
    );
    expect(root.querySelector('[data-role="report"]')).not.toBeNull();
  });

  it("restores a session purely from the API on boot", async () => {
    const calls = fakeServer(standardRoutes());
    window.location.hash = "#/s/93ad06eccc7e";
    const app = new App(new ApiClient(), root);
    await app.boot();
    expect(calls.some((c) => c.method === "GET" && /\/sessions\/93ad06eccc7e$/.test(c.url))).toBe(true);
    expect(app.state.history.length).toBe(1);
    expect(root.querySelector('[data-role="history"]')?.textContent).toContain("expertise_scarce: yes");
    expect(root.querySelector('[data-role="verdict"]')).not.toBeNull();
  });
});

describe("answering", () => {
  async function startedApp(routes = standardRoutes()): Promise<App> {
    fakeServer(routes);
    const app = new App(new ApiClient(), root);
    await app.start();
    return app;
  }

  it("waits for the server acknowledgment before recording anything", async () => {
    let release!: (r: Response) => void;
    const gate = new Promise<Response>((resolve) => (release = resolve));
    const routes = standardRoutes();
    routes.unshift(["POST", /\/answers$/, () => gate]);
    const app = await startedApp(routes);
    const before = app.state.history.length;

    const submission = app.submitAnswer("expertise_needed_in_places", true, 1.0);
    await settled();
    expect(app.state.history.length).toBe(before);

    release(jsonResponse(answerAck));
    await submission;
    expect(app.state.history.some((h) => h.attribute === "expertise_scarce")).toBe(true);
    expect(app.state.question?.attribute).toBe(answerAck.next_question.attribute);
  });

  it("keeps the question and shows the message when the answer is rejected", async () => {
    const routes = standardRoutes();
    routes.unshift(["POST", /\/answers$/, () => jsonResponse(invalidAnswer, 422)]);
    const app = await startedApp(routes);
    const question = app.state.question?.attribute;
    const history = [...app.state.history];

    await app.submitAnswer("solution_value", "enormous", 1.0);
    expect(app.state.question?.attribute).toBe(question);
    expect(app.state.history).toEqual(history);
    expect(root.querySelector('[data-role="inline-error"]')?.textContent).toBe(invalidAnswer.message);
  });

  it("offers a retry that picks up where the outage interrupted", async () => {
    const routes = standardRoutes();
    let down = true;
    routes.unshift([
      "POST",
      /\/answers$/,
      () => {
        if (down) throw new TypeError("fetch failed");
        return jsonResponse(answerAck);
      },
    ]);
    const app = await startedApp(routes);

    await app.submitAnswer("expertise_needed_in_places", true, 1.0);
    expect(root.querySelector('[data-role="retry-banner"]')).not.toBeNull();
    expect(app.state.history.length).toBe(1);

    down = false;
    await app.retry();
    expect(root.querySelector('[data-role="retry-banner"]')).toBeNull();
    expect(app.state.question?.attribute).toBe(answerAck.next_question.attribute);
  });

  it("renders the why pane with the rule citations", async () => {
    const app = await startedApp();
    await app.showWhy("expertise_scarce");
    const pane = root.querySelector('[data-role="why-pane"]');
    expect(pane?.textContent).toContain("via rule biz_scarce_expertise");
    expect(pane?.querySelector(".citation")?.textContent).toBe(whyFixture.chain[1]!.citation);
  });
});

describe("what-if", () => {
  it("accumulates overrides and posts them together", async () => {
    const calls = fakeServer(standardRoutes());
    const app = new App(new ApiClient(), root);
    await app.start();

    await app.setOverride("target_coverage", 1.0);
    await app.setOverride("salary_rate", 65000);

    const whatifCalls = calls.filter((c) => /\/whatif$/.test(c.url));
    expect(whatifCalls.length).toBe(2);
    expect(whatifCalls[1]?.body).toEqual({ overrides: { target_coverage: 1.0, salary_rate: 65000 }, cf: 1.0 });
    const delta = root.querySelector('[data-changed="effort_multiplier"] [data-role="after"]');
    expect(delta?.textContent).toBe("5.0");
  });

  it("clearing overrides reruns against an empty set", async () => {
    const calls = fakeServer(standardRoutes());
    const app = new App(new ApiClient(), root);
    await app.start();
    await app.setOverride("target_coverage", 1.0);
    await app.clearOverrides();
    const last = calls.filter((c) => /\/whatif$/.test(c.url)).at(-1);
    expect(last?.body).toEqual({ overrides: {}, cf: 1.0 });
  });
});
