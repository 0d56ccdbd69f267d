import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { createFakeService } from "./fakeService.js";

function makeClient() {
  const service = createFakeService();
  const client = new ApiClient("http://fake", service.fetch);
  return { client, requests: service.requests };
}

describe("ApiClient", () => {
  it("creates sessions via POST /sessions", async () => {
    const { client, requests } = makeClient();
    const { session_id } = await client.createSession();
    expect(session_id).toBeTruthy();
    expect(requests).toEqual([{ method: "POST", path: "/sessions" }]);
  });

  it("fetches profiles and recommendations from the session routes", async () => {
    const { client, requests } = makeClient();
    const { session_id } = await client.createSession();
    const profile = await client.getProfile(session_id);
    expect(profile.certainty).toBeCloseTo(0.2);
    const recs = await client.getRecommendations(session_id, 4);
    expect(recs.items.length).toBeGreaterThan(0);
    expect(requests.at(-1)).toEqual({
      method: "GET",
      path: `/sessions/${session_id}/recommendations?k=4`,
    });
  });

  it("adds and removes history with one-round-trip refresh payloads", async () => {
    const { client } = makeClient();
    const { session_id } = await client.createSession();
    const added = await client.addHistory(session_id, "i0");
    expect(added.profile.certainty).toBeCloseTo(0.4);
    expect(added.recommendations.items.map((r) => r.item_id)).not.toContain("i0");
    const removed = await client.removeHistory(session_id, "i0");
    expect(removed.profile.certainty).toBeCloseTo(0.2);
  });

  it("sends feedback clicks with direction", async () => {
    const { client } = makeClient();
    const { session_id } = await client.createSession();
    const view = await client.sendFeedback(session_id, 1, "+");
    expect(view.profile.tags[1]!.feedback_clicks).toBe(1);
  });

  it("surfaces server errors as ApiError with the detail message", async () => {
    const { client } = makeClient();
    const { session_id } = await client.createSession();
    await expect(client.addHistory(session_id, "i99")).rejects.toThrow(ApiError);
    await expect(client.getProfile("nope")).rejects.toThrow(/unknown session/);
  });

  it("rejects bad feedback directions with status 400", async () => {
    const { client } = makeClient();
    const { session_id } = await client.createSession();
    const bad = client.sendFeedback(session_id, 0, "up" as never);
    await expect(bad).rejects.toMatchObject({ status: 400 });
  });

  it("resolves item display metadata", async () => {
    const { client } = makeClient();
    const item = await client.getItem("i2");
    expect(item.title).toBe("Item 2");
  });
});
