import { describe, expect, it } from "vitest";

import { ApiError, requestRecommendations, uploadSet } from "../src/api.js";
import { TWO_OBJECTIVE_PAYLOAD, UPLOAD_PAYLOAD, json, stubService } from "./stub.js";

describe("uploadSet", () => {
  it("posts the raw file body to /api/sets", async () => {
    const { fetchFn, calls } = stubService();
    const payload = await uploadSet("A,B\nB,A\n", fetchFn);
    expect(payload).toEqual(UPLOAD_PAYLOAD);
    expect(calls).toHaveLength(1);
    expect(calls[0].url).toBe("/api/sets");
    expect(calls[0].init?.method).toBe("POST");
    expect(calls[0].init?.body).toBe("A,B\nB,A\n");
  });

  it("surfaces the service's error detail verbatim", async () => {
    const detail = "MalformedLineError: line 2: blank line";
    const { fetchFn } = stubService({
      "/api/sets": json({ detail }, 400),
    });
    const failure = await uploadSet("A\n\n", fetchFn).catch((e: unknown) => e);
    expect(failure).toBeInstanceOf(ApiError);
    expect((failure as ApiError).status).toBe(400);
    expect((failure as ApiError).detail).toBe(detail);
  });

  it("falls back to the status text for non-JSON errors", async () => {
    const { fetchFn } = stubService({
      "/api/sets": new Response("payload too large", {
        status: 413,
        statusText: "Request Entity Too Large",
      }),
    });
    const failure = await uploadSet("x", fetchFn).catch((e: unknown) => e);
    expect((failure as ApiError).detail).toBe("Request Entity Too Large");
  });
});

describe("requestRecommendations", () => {
  it("posts the request body as JSON to /api/recommendations", async () => {
    const { fetchFn, calls } = stubService();
    const body = {
      set_id: "abc123",
      objectives: ["dbi:min", "elapsed_seconds:min"],
      show_all: true,
    };
    const payload = await requestRecommendations(body, fetchFn);
    expect(payload).toEqual(TWO_OBJECTIVE_PAYLOAD);
    expect(calls[0].url).toBe("/api/recommendations");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual(body);
  });

  it("surfaces 404 and 422 details verbatim", async () => {
    for (const [status, detail] of [
      [404, "unknown set_id 'nope'"],
      [422, "objectives: unknown target 'speed'"],
    ] as const) {
      const { fetchFn } = stubService({
        "/api/recommendations": json({ detail }, status),
      });
      const failure = await requestRecommendations(
        { set_id: "nope", objectives: ["dbi:min"], show_all: true },
        fetchFn,
      ).catch((e: unknown) => e);
      expect((failure as ApiError).status).toBe(status);
      expect((failure as ApiError).detail).toBe(detail);
    }
  });
});
