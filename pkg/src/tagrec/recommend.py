"""User profiles, ranked recommendations and per-item explanations.

The profile of a user is the sum of the encoder rows of their history
items. For display, affinities are shrunk into [-c, c] where the
certainty c = min(0.2 + 0.2 h, 0.8) grows with history length h.
Feedback clicks are denominated in display units (0.2 per click, clamped
to one full unit) and are converted back to raw scale before scoring.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .data import TagMatrix
from .ease import ItemItemModel, score_ease
from .errors import ValidationError
from .solver import EncoderModel

CLICK_STEP = 0.2  # display units per click
FEEDBACK_LIMIT = 1.0  # five clicks each way
CERTAINTY_BASE = 0.2
CERTAINTY_PER_ITEM = 0.2
CERTAINTY_CAP = 0.8

EXPLANATION_TOP_K = 5
EXPLANATION_MIN_PERCENT = 5.0


def certainty(history_length: int) -> float:
    return min(CERTAINTY_BASE + CERTAINTY_PER_ITEM * history_length, CERTAINTY_CAP)


@dataclass(frozen=True)
class UserState:
    """Session state: ordered unique history plus per-tag feedback
    (display units)."""

    history: tuple[int, ...] = ()
    feedback: tuple[float, ...] = ()

    def __post_init__(self):
        if len(set(self.history)) != len(self.history):
            raise ValidationError("history items must be unique")

    def feedback_array(self, n_tags: int) -> np.ndarray:
        if not self.feedback:
            return np.zeros(n_tags)
        arr = np.asarray(self.feedback, dtype=np.float64)
        if len(arr) != n_tags:
            raise ValidationError("feedback vector length mismatch")
        return arr


@dataclass(frozen=True)
class TagProfile:
    raw: np.ndarray  # length t, model scale (history + converted feedback)
    display: np.ndarray  # length t, in [-c, c]
    certainty: float
    feedback_scale: float  # raw units per display unit


@dataclass(frozen=True)
class Explanation:
    tag: int
    percent: float  # signed contribution to the item score
    term: float  # raw affinity times the tag indicator


@dataclass(frozen=True)
class RankedRecommendation:
    item: int
    score: float
    percent_match: float
    explanations: tuple[Explanation, ...]


def profile(state: UserState, model: EncoderModel, tags: TagMatrix) -> TagProfile:
    """Tag affinities for a user state.

    Feedback in display units is mapped to raw scale with the factor
    max|history affinity| / c (1 for a cold user), so one click moves the
    profile by a fixed fraction of the strongest learned affinity.
    """
    t = model.n_tags
    for item in state.history:
        if not 0 <= item < model.n_items:
            raise ValidationError(f"history item {item} out of range")
    base = model.e[list(state.history)].sum(axis=0) if state.history else np.zeros(t)
    c = certainty(len(state.history))
    base_span = float(np.abs(base).max(initial=0.0))
    feedback_scale = base_span / c if base_span > 0 else 1.0
    raw = base + state.feedback_array(t) * feedback_scale
    span = float(np.abs(raw).max(initial=0.0))
    display = c * raw / span if span > 0 else np.zeros(t)
    return TagProfile(raw=raw, display=display, certainty=c, feedback_scale=feedback_scale)


def score_items(prof: TagProfile, tags: TagMatrix, exclude: Sequence[int] = ()) -> np.ndarray:
    """Dot product of the raw profile with every item's tag row; excluded
    items get a -inf sentinel."""
    scores = tags.dense() @ prof.raw
    if len(exclude):
        scores[np.asarray(list(exclude), dtype=np.int64)] = -np.inf
    return scores


def explain_item(prof: TagProfile, tags: TagMatrix, item: int) -> tuple[Explanation, ...]:
    """Signed percent contributions of an item's tags to its score.

    Percents are normalized by the sum of absolute contributions; only the
    top 5 by magnitude with at least 5% are returned, sorted by magnitude.
    """
    if not 0 <= item < tags.n_items:
        raise ValidationError(f"item {item} out of range")
    row = tags.dense()[item]
    terms = prof.raw * row
    total = float(np.abs(terms).sum())
    if total == 0.0:
        return ()
    percents = 100.0 * terms / total
    order = sorted(np.nonzero(terms)[0], key=lambda j: (-abs(percents[j]), j))
    out = [
        Explanation(tag=int(j), percent=float(percents[j]), term=float(terms[j]))
        for j in order
        if abs(percents[j]) >= EXPLANATION_MIN_PERCENT
    ]
    return tuple(out[:EXPLANATION_TOP_K])


def apply_feedback(state: UserState, tag: int, delta: int, n_tags: int) -> UserState:
    """Apply one +/- click on a tag, returning the new state."""
    if not 0 <= tag < n_tags:
        raise ValidationError(f"tag {tag} out of range")
    if delta not in (1, -1):
        raise ValidationError("delta must be +1 or -1")
    fb = state.feedback_array(n_tags)
    fb[tag] = float(np.clip(fb[tag] + delta * CLICK_STEP, -FEEDBACK_LIMIT, FEEDBACK_LIMIT))
    return replace(state, feedback=tuple(fb))


def category_impact(prof: TagProfile, tags: TagMatrix) -> dict[str, float]:
    """Share of each category in the displayed profile (sums to 1).

    An all-zero profile yields the uniform distribution.
    """
    cats = tags.categories
    sums = {c: 0.0 for c in cats}
    for j, (cat, _) in enumerate(tags.vocabulary):
        sums[cat] += abs(float(prof.display[j]))
    total = sum(sums.values())
    if total == 0.0:
        return {c: 1.0 / len(cats) for c in cats}
    return {c: v / total for c, v in sums.items()}


def ensemble_scores(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Geometric mean of nonnegative-clipped scores (an and-gate on
    relevance: zero whenever either side is nonpositive)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError("score vectors must have equal length")
    return np.sqrt(np.clip(a, 0.0, None) * np.clip(b, 0.0, None))


def rank_items(scores: np.ndarray, k: int) -> list[int]:
    """Top-k item indices by score, ties broken by ascending index;
    -inf-sentinel (excluded) items never appear."""
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return [i for i in order if np.isfinite(scores[i])][:k]


def recommend(
    state: UserState,
    model: EncoderModel,
    tags: TagMatrix,
    k: int,
    ensemble: ItemItemModel | None = None,
) -> list[RankedRecommendation]:
    """Top-k recommendations with explanations, history excluded.

    With an ensemble model the ranking uses the combined scores while
    explanations still come from the tag profile alone.
    """
    if k < 1:
        raise ValidationError("k must be at least 1")
    prof = profile(state, model, tags)
    scores = score_items(prof, tags, exclude=state.history)
    ranking_scores = scores
    if ensemble is not None:
        static = score_ease(state.history, ensemble)
        combined = ensemble_scores(np.where(np.isfinite(scores), scores, 0.0), static)
        combined[~np.isfinite(scores)] = -np.inf
        ranking_scores = combined
    top = rank_items(ranking_scores, k)
    positive_max = max((ranking_scores[i] for i in top if ranking_scores[i] > 0), default=0.0)
    out = []
    for item in top:
        score = float(ranking_scores[item])
        pct = 100.0 * max(score, 0.0) / positive_max if positive_max > 0 else 0.0
        out.append(
            RankedRecommendation(
                item=item,
                score=score,
                percent_match=float(pct),
                explanations=explain_item(prof, tags, item),
            )
        )
    return out
