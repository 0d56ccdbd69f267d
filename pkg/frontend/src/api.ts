import type {
  FeedbackDirection,
  ItemDisplay,
  Profile,
  Recommendations,
  SessionView,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type Fetch = typeof fetch;

/**
 * Thin typed client over the service API. The client never computes
 * scores, percentages or affinities itself: every number rendered by the
 * console comes straight out of these responses.
 */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: Fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = (await resp.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        /* non-JSON error body; keep the status text */
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  createSession(): Promise<{ session_id: string }> {
    return this.request("/sessions", { method: "POST" });
  }

  getProfile(sessionId: string): Promise<Profile> {
    return this.request(`/sessions/${sessionId}/profile`);
  }

  addHistory(sessionId: string, itemId: string): Promise<SessionView> {
    return this.request(`/sessions/${sessionId}/history`, {
      method: "POST",
      body: JSON.stringify({ item_id: itemId }),
    });
  }

  removeHistory(sessionId: string, itemId: string): Promise<SessionView> {
    return this.request(
      `/sessions/${sessionId}/history/${encodeURIComponent(itemId)}`,
      { method: "DELETE" },
    );
  }

  sendFeedback(
    sessionId: string,
    tagId: number,
    direction: FeedbackDirection,
  ): Promise<SessionView> {
    return this.request(`/sessions/${sessionId}/feedback`, {
      method: "POST",
      body: JSON.stringify({ tag_id: tagId, direction }),
    });
  }

  getRecommendations(sessionId: string, k = 20): Promise<Recommendations> {
    return this.request(`/sessions/${sessionId}/recommendations?k=${k}`);
  }

  getItem(itemId: string): Promise<ItemDisplay> {
    return this.request(`/items/${encodeURIComponent(itemId)}`);
  }
}
