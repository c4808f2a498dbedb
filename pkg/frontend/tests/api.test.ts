import { afterEach, describe, expect, it, vi } from "vitest";
import { ApiClient, ApiError, NetworkError } from "../src/api.js";
import invalidJson from "./fixtures/invalid_answer_422.json";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("request shaping", () => {
  it("creates sessions with a JSON POST", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse({ session_id: "abc", status: "in_progress" }));
    vi.stubGlobal("fetch", fetchMock);
    const client = new ApiClient("http://api");
    await client.createSession({ fixture: "thyroid" });
    expect(fetchMock).toHaveBeenCalledWith("http://api/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ fixture: "thyroid" }),
    });
  });

  it("posts answers with attribute, value, and certainty", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse({}));
    vi.stubGlobal("fetch", fetchMock);
    await new ApiClient().answer("s1", "expertise_scarce", true, 0.8);
    const [url, init] = fetchMock.mock.calls[0] as [string, RequestInit];
    expect(url).toBe("/sessions/s1/answers");
    expect(JSON.parse(init.body as string)).toEqual({ attribute: "expertise_scarce", value: true, cf: 0.8 });
  });

  it("asks for the JSON report format", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse({}));
    vi.stubGlobal("fetch", fetchMock);
    await new ApiClient().report("s1");
    expect(fetchMock.mock.calls[0]?.[0]).toBe("/sessions/s1/report?format=json");
  });

  it("URL-encodes explain attributes and session ids", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse({}));
    vi.stubGlobal("fetch", fetchMock);
    await new ApiClient().explainWhy("s 1", "a&b");
    expect(fetchMock.mock.calls[0]?.[0]).toBe("/sessions/s%201/explain?attribute=a%26b&mode=why");
  });

  it("sends whatif overrides as given", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse({}));
    vi.stubGlobal("fetch", fetchMock);
    await new ApiClient().whatif("s1", { target_coverage: 1.0 });
    const [, init] = fetchMock.mock.calls[0] as [string, RequestInit];
    expect(JSON.parse(init.body as string)).toEqual({ overrides: { target_coverage: 1.0 }, cf: 1.0 });
  });
});

describe("error mapping", () => {
  it("maps the service error envelope onto ApiError", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(invalidJson, 422));
    vi.stubGlobal("fetch", fetchMock);
    const failure = await new ApiClient().answer("s1", "solution_value", "enormous").catch((e) => e);
    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.status).toBe(422);
    expect(failure.code).toBe("invalid_answer");
    expect(failure.message).toContain("expected one of");
    expect(failure.detail).toEqual((invalidJson as { detail: unknown }).detail);
  });

  it("survives a non-JSON error body", async () => {
    const fetchMock = vi.fn().mockResolvedValue(new Response("boom", { status: 500 }));
    vi.stubGlobal("fetch", fetchMock);
    const failure = await new ApiClient().kbMeta().catch((e) => e);
    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.code).toBe("http_error");
    expect(failure.status).toBe(500);
  });

  it("wraps transport failures in NetworkError", async () => {
    const fetchMock = vi.fn().mockRejectedValue(new TypeError("fetch failed"));
    vi.stubGlobal("fetch", fetchMock);
    const failure = await new ApiClient().session("s1").catch((e) => e);
    expect(failure).toBeInstanceOf(NetworkError);
  });
});
