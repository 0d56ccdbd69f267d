import { barGeometry, groupProfile, tagLabel } from "./model.js";
import type { Profile, RecommendedItem } from "./types.js";

/** Escape text destined for innerHTML. */
export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderCertaintyBadge(certainty: number): string {
  return `<span class="certainty-badge" data-certainty="${certainty.toFixed(1)}">certainty ${certainty.toFixed(1)}</span>`;
}

function renderBar(affinity: number, certainty: number): string {
  const geo = barGeometry(affinity, certainty);
  if (geo.side === "empty") {
    return `<div class="bar"><div class="bar-center"></div></div>`;
  }
  const cls = geo.side === "right" ? "bar-fill positive" : "bar-fill negative";
  return (
    `<div class="bar"><div class="bar-center"></div>` +
    `<div class="${cls}" style="width:${geo.widthPercent.toFixed(2)}%"></div></div>`
  );
}

/**
 * Profile panel: per-category sections with impact bars, then the tags
 * of that category as bidirectional bars with +/- buttons, strongest
 * affinities first.
 */
export function renderProfile(profile: Profile): string {
  const groups = groupProfile(profile);
  const sections = groups
    .map((group) => {
      const rows = group.tags
        .map((tag) => {
          const clicks =
            tag.feedback_clicks === 0
              ? ""
              : `<span class="clicks">${tag.feedback_clicks > 0 ? "+" : ""}${tag.feedback_clicks}</span>`;
          return (
            `<div class="tag-row" data-tag-id="${tag.tag_id}">` +
            `<button class="feedback-btn minus" data-tag-id="${tag.tag_id}" data-direction="-">&minus;</button>` +
            `<span class="tag-label">${esc(tagLabel(tag))}</span>` +
            renderBar(tag.display_affinity, profile.certainty) +
            `<button class="feedback-btn plus" data-tag-id="${tag.tag_id}" data-direction="+">+</button>` +
            clicks +
            `</div>`
          );
        })
        .join("");
      return (
        `<section class="category" data-category="${esc(group.category)}">` +
        `<header><h3>${esc(group.category)}</h3>` +
        `<div class="impact-bar"><div class="impact-fill" style="width:${(100 * group.impact).toFixed(1)}%"></div></div>` +
        `<span class="impact-pct">${(100 * group.impact).toFixed(0)}%</span>` +
        `</header>${rows}</section>`
      );
    })
    .join("");
  return `<div class="profile">${renderCertaintyBadge(profile.certainty)}${sections}</div>`;
}

/** Removable history chips; an empty history shows a cold-start hint. */
export function renderHistory(items: { id: string; title: string }[]): string {
  if (items.length === 0) {
    return `<div class="history empty"><p class="cold-hint">No history yet — add items or boost tags to get started.</p></div>`;
  }
  const chips = items
    .map(
      (item) =>
        `<span class="chip" data-item-id="${esc(item.id)}">${esc(item.title)}` +
        `<button class="chip-remove" data-item-id="${esc(item.id)}" aria-label="remove">&times;</button></span>`,
    )
    .join("");
  return `<div class="history">${chips}</div>`;
}

/**
 * Recommendation cards. Every explanation row comes straight from the
 * server (already capped at 5 rows of at least 5% magnitude); negative
 * contributions get their own styling.
 */
export function renderRecommendations(
  items: RecommendedItem[],
  titles: Map<string, string>,
): string {
  const cards = items
    .map((item) => {
      const rows = item.explanations
        .map((ex) => {
          const cls = ex.percent < 0 ? "explanation negative" : "explanation positive";
          const sign = ex.percent > 0 ? "+" : "";
          return (
            `<li class="${cls}"><span class="ex-tag">${esc(ex.tag)}</span>` +
            `<span class="ex-pct">${sign}${ex.percent.toFixed(1)}%</span></li>`
          );
        })
        .join("");
      return (
        `<article class="card" data-item-id="${esc(item.item_id)}">` +
        `<h4>${esc(titles.get(item.item_id) ?? item.item_id)}</h4>` +
        `<div class="match">${item.percent_match.toFixed(0)}% match</div>` +
        `<ul class="explanations">${rows}</ul>` +
        `</article>`
      );
    })
    .join("");
  return `<div class="cards">${cards}</div>`;
}

export function renderError(message: string): string {
  return `<div class="toast error">${esc(message)}</div>`;
}
