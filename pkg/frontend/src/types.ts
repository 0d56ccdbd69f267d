/** Payload shapes of the recommendation service HTTP API. */

export interface TagView {
  tag_id: number;
  tag: string;
  category: string;
  display_affinity: number;
  feedback_clicks: number;
}

export interface CategoryImpact {
  name: string;
  impact: number;
}

export interface Profile {
  certainty: number;
  tags: TagView[];
  categories: CategoryImpact[];
}

export interface ExplanationRow {
  tag_id: number;
  tag: string;
  percent: number;
}

export interface RecommendedItem {
  item_id: string;
  score: number;
  percent_match: number;
  explanations: ExplanationRow[];
}

export interface Recommendations {
  items: RecommendedItem[];
}

/** Returned by every mutating endpoint: one round trip refreshes everything. */
export interface SessionView {
  session_id: string;
  profile: Profile;
  recommendations: Recommendations;
}

export interface ItemDisplay {
  item_id: string;
  title: string;
  description: string;
}

export type FeedbackDirection = "+" | "-";
