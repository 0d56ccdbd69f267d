import type { Profile, TagView } from "./types.js";

export const CLICK_STEP = 0.2;
export const MAX_CLICKS = 5;

export interface CategoryGroup {
  category: string;
  impact: number;
  tags: TagView[];
}

/**
 * Group the profile's tags by category, the most influential tags first
 * within each group (|display affinity| descending, ties by tag id), and
 * the categories themselves ordered by impact descending.
 */
export function groupProfile(profile: Profile): CategoryGroup[] {
  const impact = new Map(profile.categories.map((c) => [c.name, c.impact]));
  const groups = new Map<string, TagView[]>();
  for (const tag of profile.tags) {
    const bucket = groups.get(tag.category);
    if (bucket) bucket.push(tag);
    else groups.set(tag.category, [tag]);
  }
  const out: CategoryGroup[] = [];
  for (const [category, tags] of groups) {
    tags.sort(
      (a, b) =>
        Math.abs(b.display_affinity) - Math.abs(a.display_affinity) ||
        a.tag_id - b.tag_id,
    );
    out.push({ category, impact: impact.get(category) ?? 0, tags });
  }
  out.sort((a, b) => b.impact - a.impact || a.category.localeCompare(b.category));
  return out;
}

/** Short human label: the tag value without its category prefix. */
export function tagLabel(tag: TagView): string {
  const sep = tag.tag.indexOf(":");
  return sep >= 0 ? tag.tag.slice(sep + 1) : tag.tag;
}

/**
 * Optimistic view of one +/- click: bump the click counter (clamped to
 * +-5) and mark the profile stale until the server responds. Affinities
 * are NOT touched — the client never predicts model output.
 */
export function optimisticClick(
  profile: Profile,
  tagId: number,
  direction: "+" | "-",
): Profile {
  const delta = direction === "+" ? 1 : -1;
  return {
    ...profile,
    tags: profile.tags.map((t) =>
      t.tag_id === tagId
        ? {
            ...t,
            feedback_clicks: clampClicks(t.feedback_clicks + delta),
          }
        : t,
    ),
  };
}

export function clampClicks(clicks: number): number {
  return Math.max(-MAX_CLICKS, Math.min(MAX_CLICKS, clicks));
}

/** Signed bar geometry for a bidirectional affinity bar. */
export interface BarGeometry {
  /** Percent width of the filled part, 0..50 of the full track. */
  widthPercent: number;
  /** Which half of the track the fill occupies. */
  side: "left" | "right" | "empty";
}

/**
 * Map a display affinity in [-c, c] to bar geometry: positive fills to
 * the right of center, negative to the left, scaled so |affinity| = c
 * fills a full half-track.
 */
export function barGeometry(affinity: number, certainty: number): BarGeometry {
  if (affinity === 0 || certainty <= 0) {
    return { widthPercent: 0, side: "empty" };
  }
  const fraction = Math.min(Math.abs(affinity) / certainty, 1);
  return {
    widthPercent: 50 * fraction,
    side: affinity > 0 ? "right" : "left",
  };
}

/** One in-flight mutation per session; the rest wait their turn. */
export class MutationQueue {
  private chain: Promise<unknown> = Promise.resolve();

  enqueue<T>(task: () => Promise<T>): Promise<T> {
    const next = this.chain.then(task, task);
    this.chain = next.catch(() => undefined);
    return next;
  }
}
