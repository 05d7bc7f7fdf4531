import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, ReviewApi } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("ReviewApi", () => {
  it("requests the next item with the reviewer query parameter", async () => {
    const fetchMock = vi.fn(async () => jsonResponse({ item_id: "i1", proposed: [1] }));
    vi.stubGlobal("fetch", fetchMock);
    const api = new ReviewApi("http://svc");
    const result = await api.nextItem("alice");
    expect(fetchMock).toHaveBeenCalledWith("http://svc/api/queue/next?reviewer=alice");
    expect(result?.item_id).toBe("i1");
  });

  it("maps 204 to null (queue exhausted)", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => new Response(null, { status: 204 })));
    const api = new ReviewApi("http://svc");
    expect(await api.nextItem("bob")).toBeNull();
  });

  it("posts reviews as JSON", async () => {
    const fetchMock = vi.fn(async () => jsonResponse({ item_id: "i1", status: "pending" }));
    vi.stubGlobal("fetch", fetchMock);
    await new ReviewApi().submitReview("i1", "alice", "modify", [1, 4]);
    const [url, init] = fetchMock.mock.calls[0]! as [string, RequestInit];
    expect(url).toBe("/api/reviews/i1");
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body as string)).toEqual({
      reviewer: "alice",
      decision: "modify",
      final: [1, 4],
    });
  });

  it("raises ApiError with the service error class", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () =>
        jsonResponse({ error: "DuplicateReviewerError", detail: "already reviewed" }, 409),
      ),
    );
    const api = new ReviewApi();
    const err = await api.submitReview("i1", "a", "accept", [1]).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.code).toBe("DuplicateReviewerError");
  });

  it("fetches the taxonomy", async () => {
    const rows = [{ id: 1, name: "n", definition: "d" }];
    const fetchMock = vi.fn(async () => jsonResponse(rows));
    vi.stubGlobal("fetch", fetchMock);
    expect(await new ReviewApi().taxonomy()).toEqual(rows);
    expect(fetchMock).toHaveBeenCalledWith("/api/taxonomy");
  });

  it("returns export text verbatim", async () => {
    vi.stubGlobal("fetch", vi.fn(async () => new Response('{"grant_id": "g"}\n')));
    expect(await new ReviewApi().exportVerified()).toBe('{"grant_id": "g"}\n');
  });
});
