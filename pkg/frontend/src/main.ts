import { ApiClient } from "./api.js";
import { MutationQueue, optimisticClick } from "./model.js";
import {
  renderError,
  renderHistory,
  renderProfile,
  renderRecommendations,
} from "./render.js";
import type { FeedbackDirection, Profile, RecommendedItem } from "./types.js";

interface AppState {
  sessionId: string;
  profile: Profile;
  recommendations: RecommendedItem[];
  history: string[];
  titles: Map<string, string>;
}

const api = new ApiClient("");
const queue = new MutationQueue();

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function draw(state: AppState): void {
  el("profile").innerHTML = renderProfile(state.profile);
  el("history").innerHTML = renderHistory(
    state.history.map((id) => ({ id, title: state.titles.get(id) ?? id })),
  );
  el("recommendations").innerHTML = renderRecommendations(
    state.recommendations,
    state.titles,
  );
}

function toast(message: string): void {
  const host = el("toasts");
  host.innerHTML = renderError(message);
  setTimeout(() => {
    host.innerHTML = "";
  }, 4000);
}

async function resolveTitles(state: AppState, ids: string[]): Promise<void> {
  const missing = ids.filter((id) => !state.titles.has(id));
  const found = await Promise.all(
    missing.map(async (id) => {
      try {
        const item = await api.getItem(id);
        return [id, item.title] as const;
      } catch {
        return [id, id] as const;
      }
    }),
  );
  for (const [id, title] of found) state.titles.set(id, title);
}

async function applyServerView(
  state: AppState,
  view: { profile: Profile; recommendations: { items: RecommendedItem[] } },
): Promise<void> {
  state.profile = view.profile;
  state.recommendations = view.recommendations.items;
  await resolveTitles(
    state,
    state.recommendations.map((r) => r.item_id),
  );
  draw(state);
}

function mutate(
  state: AppState,
  task: () => Promise<{ profile: Profile; recommendations: { items: RecommendedItem[] } }>,
): void {
  const snapshot = state.profile;
  void queue.enqueue(async () => {
    try {
      await applyServerView(state, await task());
    } catch (err) {
      // roll back the optimistic render; the server stays authoritative
      state.profile = snapshot;
      draw(state);
      toast(err instanceof Error ? err.message : String(err));
    }
  });
}

function wire(state: AppState): void {
  el("profile").addEventListener("click", (event) => {
    const btn = (event.target as HTMLElement).closest<HTMLElement>(".feedback-btn");
    if (!btn) return;
    const tagId = Number(btn.dataset["tagId"]);
    const direction = btn.dataset["direction"] as FeedbackDirection;
    state.profile = optimisticClick(state.profile, tagId, direction);
    draw(state);
    mutate(state, () => api.sendFeedback(state.sessionId, tagId, direction));
  });

  el("history").addEventListener("click", (event) => {
    const btn = (event.target as HTMLElement).closest<HTMLElement>(".chip-remove");
    if (!btn) return;
    const itemId = btn.dataset["itemId"];
    if (!itemId) return;
    state.history = state.history.filter((id) => id !== itemId);
    draw(state);
    mutate(state, async () => {
      const view = await api.removeHistory(state.sessionId, itemId);
      return view;
    });
  });

  el("recommendations").addEventListener("click", (event) => {
    const card = (event.target as HTMLElement).closest<HTMLElement>(".card");
    if (!card) return;
    const itemId = card.dataset["itemId"];
    if (!itemId || state.history.includes(itemId)) return;
    state.history = [...state.history, itemId];
    draw(state);
    mutate(state, () => api.addHistory(state.sessionId, itemId));
  });
}

async function boot(): Promise<void> {
  const { session_id } = await api.createSession();
  const profile = await api.getProfile(session_id);
  const recs = await api.getRecommendations(session_id);
  const state: AppState = {
    sessionId: session_id,
    profile,
    recommendations: recs.items,
    history: [],
    titles: new Map(),
  };
  await resolveTitles(
    state,
    state.recommendations.map((r) => r.item_id),
  );
  wire(state);
  draw(state);
}

boot().catch((err) => {
  document.body.innerHTML = renderError(
    `Could not reach the recommendation service: ${err instanceof Error ? err.message : err}`,
  );
});
