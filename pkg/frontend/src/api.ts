import type {
  AnswerAck,
  ApiErrorBody,
  HowOut,
  KbMeta,
  NextQuestionOut,
  Report,
  SessionState,
  WhatIfOut,
  WhyOut,
} from "./types.js";

/** The service answered with an error envelope (4xx/5xx). */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly detail: unknown = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** The request never reached the service (connection refused, DNS, ...). */
export class NetworkError extends Error {
  constructor(override readonly cause: unknown) {
    super("could not reach the screening service");
    this.name = "NetworkError";
  }
}

export interface SessionSeed {
  fixture?: string;
  answers?: Record<string, unknown>;
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.base + path, {
        method,
        headers: body === undefined ? undefined : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new NetworkError(err);
    }
    if (!response.ok) {
      let payload: Partial<ApiErrorBody> = {};
      try {
        payload = (await response.json()) as ApiErrorBody;
      } catch {
        // non-JSON error body; fall through to the generic message
      }
      throw new ApiError(
        response.status,
        payload.code ?? "http_error",
        payload.message ?? `request failed with status ${response.status}`,
        payload.detail ?? null,
      );
    }
    return (await response.json()) as T;
  }

  private async requestText(path: string): Promise<string> {
    let response: Response;
    try {
      response = await fetch(this.base + path);
    } catch (err) {
      throw new NetworkError(err);
    }
    if (!response.ok) {
      throw new ApiError(response.status, "http_error", `request failed with status ${response.status}`);
    }
    return response.text();
  }

  kbMeta(): Promise<KbMeta> {
    return this.request<KbMeta>("GET", "/kb/meta");
  }

  createSession(seed: SessionSeed = {}): Promise<SessionState> {
    return this.request<SessionState>("POST", "/sessions", seed);
  }

  session(id: string): Promise<SessionState> {
    return this.request<SessionState>("GET", `/sessions/${encodeURIComponent(id)}`);
  }

  nextQuestion(id: string): Promise<NextQuestionOut> {
    return this.request<NextQuestionOut>("GET", `/sessions/${encodeURIComponent(id)}/next-question`);
  }

  answer(id: string, attribute: string, value: unknown, cf = 1.0): Promise<AnswerAck> {
    return this.request<AnswerAck>("POST", `/sessions/${encodeURIComponent(id)}/answers`, {
      attribute,
      value,
      cf,
    });
  }

  report(id: string): Promise<Report> {
    return this.request<Report>("GET", `/sessions/${encodeURIComponent(id)}/report?format=json`);
  }

  reportMarkdown(id: string): Promise<string> {
    return this.requestText(`/sessions/${encodeURIComponent(id)}/report?format=md`);
  }

  explainWhy(id: string, attribute: string): Promise<WhyOut> {
    const q = encodeURIComponent(attribute);
    return this.request<WhyOut>("GET", `/sessions/${encodeURIComponent(id)}/explain?attribute=${q}&mode=why`);
  }

  explainHow(id: string, attribute: string): Promise<HowOut> {
    const q = encodeURIComponent(attribute);
    return this.request<HowOut>("GET", `/sessions/${encodeURIComponent(id)}/explain?attribute=${q}&mode=how`);
  }

  whatif(id: string, overrides: Record<string, unknown>, cf = 1.0): Promise<WhatIfOut> {
    return this.request<WhatIfOut>("POST", `/sessions/${encodeURIComponent(id)}/whatif`, {
      overrides,
      cf,
    });
  }
}
