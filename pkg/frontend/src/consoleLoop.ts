import type { ApiClient } from "./api.js";
import type { RecommendedItem } from "./types.js";

export interface StepResult {
  step: string;
  ok: boolean;
  detail: string;
}

function check(results: StepResult[], step: string, ok: boolean, detail: string): void {
  results.push({ step, ok, detail });
  if (!ok) throw new Error(`console loop failed at "${step}": ${detail}`);
}

function order(items: RecommendedItem[]): string {
  return items.map((r) => r.item_id).join(",");
}

function cardsWellFormed(items: RecommendedItem[]): boolean {
  return items.every(
    (r) =>
      r.explanations.length <= 5 &&
      r.explanations.every((ex) => Math.abs(ex.percent) >= 5),
  );
}

/**
 * The scripted interaction loop: create a session, add two items, check
 * the certainty badge reads 0.6, boost one tag three times, verify the
 * recommendation order reacts and every card explains itself within the
 * top-5 / >=5% display rule, then remove a history item and confirm the
 * profile refreshes.
 */
export async function runConsoleLoop(api: ApiClient): Promise<StepResult[]> {
  const results: StepResult[] = [];

  const { session_id } = await api.createSession();
  check(results, "create session", session_id.length > 0, session_id);

  const initial = await api.getRecommendations(session_id, 20);
  check(
    results,
    "initial recommendations",
    initial.items.length > 0,
    `${initial.items.length} items`,
  );

  const [first, second] = initial.items;
  if (!first || !second) throw new Error("need at least two recommendations");
  await api.addHistory(session_id, first.item_id);
  const afterTwo = await api.addHistory(session_id, second.item_id);
  check(
    results,
    "certainty badge after 2 items",
    Math.abs(afterTwo.profile.certainty - 0.6) < 1e-9,
    `certainty=${afterTwo.profile.certainty}`,
  );

  const before = afterTwo.recommendations.items;
  // boost the strongest *negative-or-weak* tag to actually move the ranking
  const target = [...afterTwo.profile.tags].sort(
    (a, b) => a.display_affinity - b.display_affinity,
  )[0];
  if (!target) throw new Error("profile has no tags");
  let view = afterTwo;
  for (let i = 0; i < 3; i += 1) {
    view = await api.sendFeedback(session_id, target.tag_id, "+");
  }
  const after = view.recommendations.items;
  check(
    results,
    "recommendation order changes after 3 clicks",
    order(before) !== order(after),
    `before=[${order(before).slice(0, 60)}...] after=[${order(after).slice(0, 60)}...]`,
  );
  check(
    results,
    "cards show <= 5 explanations, each |percent| >= 5",
    cardsWellFormed(after),
    `${after.length} cards checked`,
  );
  const boosted = view.profile.tags.find((t) => t.tag_id === target.tag_id);
  check(
    results,
    "boosted tag shows 3 clicks",
    boosted?.feedback_clicks === 3,
    `clicks=${boosted?.feedback_clicks}`,
  );

  const removed = await api.removeHistory(session_id, first.item_id);
  check(
    results,
    "profile refreshes after removal",
    Math.abs(removed.profile.certainty - 0.4) < 1e-9,
    `certainty=${removed.profile.certainty}`,
  );
  const profileNow = await api.getProfile(session_id);
  check(
    results,
    "persisted profile matches mutation response",
    Math.abs(profileNow.certainty - removed.profile.certainty) < 1e-12,
    `certainty=${profileNow.certainty}`,
  );

  return results;
}
