"""Offline evaluation: ranking metrics, grid search and simulated feedback."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data import EvaluationSplit, TagMatrix
from .ease import ItemItemModel
from .errors import ValidationError
from .recommend import (
    UserState,
    apply_feedback,
    ensemble_scores,
    profile,
    rank_items,
    score_items,
)
from .ease import score_ease
from .solver import EncoderModel, Hyperparams, train

log = logging.getLogger(__name__)

DEFAULT_KS = (20, 100)
NDCG_K = 100


def recall_at_k(topk: Sequence[int], truth: set, k: int) -> float:
    """Hits in the first k over min(k, |truth|)."""
    if k < 1:
        raise ValidationError("k must be at least 1")
    if not truth:
        raise ValidationError("ground truth must be non-empty")
    hits = sum(1 for item in list(topk)[:k] if item in truth)
    return hits / min(k, len(truth))


def ndcg_at_k(topk: Sequence[int], truth: set, k: int) -> float:
    """Binary nDCG with the ideal DCG over min(k, |truth|) positions."""
    if k < 1:
        raise ValidationError("k must be at least 1")
    if not truth:
        raise ValidationError("ground truth must be non-empty")
    dcg = sum(
        1.0 / np.log2(rank + 2)
        for rank, item in enumerate(list(topk)[:k])
        if item in truth
    )
    idcg = sum(1.0 / np.log2(rank + 2) for rank in range(min(k, len(truth))))
    return float(dcg / idcg)


@dataclass(frozen=True)
class MetricReport:
    """Aggregate ranking metrics with per-user values retained."""

    recall: dict[int, float]
    ndcg: float
    per_user_recall: dict[int, np.ndarray]
    per_user_ndcg: np.ndarray

    @property
    def n_users(self) -> int:
        return len(self.per_user_ndcg)


@dataclass(frozen=True)
class ModelBundle:
    """Everything needed to rank items for a held-out user."""

    encoder: EncoderModel
    tags: TagMatrix
    static: ItemItemModel | None = None
    use_ensemble: bool = False

    def __post_init__(self):
        if self.use_ensemble and self.static is None:
            raise ValidationError("ensemble requested but no static model given")


def rank_for_user(bundle: ModelBundle, state: UserState, k: int | None = None) -> list[int]:
    """Ranked item indices for a user state, history excluded."""
    prof = profile(state, bundle.encoder, bundle.tags)
    scores = score_items(prof, bundle.tags, exclude=state.history)
    if bundle.use_ensemble:
        static = score_ease(state.history, bundle.static)
        combined = ensemble_scores(np.where(np.isfinite(scores), scores, 0.0), static)
        combined[~np.isfinite(scores)] = -np.inf
        scores = combined
    return rank_items(scores, k if k is not None else len(scores))


def _aggregate(
    per_user_states: list[UserState],
    truths: Sequence[tuple[int, ...]],
    bundle: ModelBundle,
    ks: Sequence[int],
) -> MetricReport:
    max_k = max(max(ks), NDCG_K)
    recalls = {k: [] for k in ks}
    ndcgs = []
    for state, truth in zip(per_user_states, truths):
        topk = rank_for_user(bundle, state, max_k)
        truth_set = set(truth)
        for k in ks:
            recalls[k].append(recall_at_k(topk, truth_set, k))
        ndcgs.append(ndcg_at_k(topk, truth_set, NDCG_K))
    return MetricReport(
        recall={k: float(np.mean(v)) for k, v in recalls.items()},
        ndcg=float(np.mean(ndcgs)),
        per_user_recall={k: np.asarray(v) for k, v in recalls.items()},
        per_user_ndcg=np.asarray(ndcgs),
    )


def evaluate(
    bundle: ModelBundle, split: EvaluationSplit, ks: Sequence[int] = DEFAULT_KS
) -> MetricReport:
    """Static metrics over all evaluation users of a split."""
    states, truths = [], []
    for uid, hist, truth in zip(split.user_ids, split.histories, split.ground_truths):
        if not truth:
            log.warning("user %s has empty ground truth; skipped", uid)
            continue
        states.append(UserState(history=hist))
        truths.append(truth)
    return _aggregate(states, truths, bundle, ks)


@dataclass(frozen=True)
class GridSearchResult:
    best: Hyperparams
    best_ndcg: float
    table: tuple[tuple[Hyperparams, MetricReport], ...]


def grid_search(
    grid: Sequence[Hyperparams],
    train_x,
    tags: TagMatrix,
    validation: EvaluationSplit,
    static: ItemItemModel | None = None,
    use_ensemble: bool = False,
) -> GridSearchResult:
    """Train one model per grid point and pick the best validation nDCG@100.

    Ties are broken towards the smaller (lam1, lam2) pair.
    """
    if not grid:
        raise ValidationError("empty hyperparameter grid")
    rows = []
    for hp in grid:
        model = train(train_x, tags, hp)
        bundle = ModelBundle(model, tags, static=static, use_ensemble=use_ensemble)
        rows.append((hp, evaluate(bundle, validation)))
    best_hp, best_report = min(
        rows, key=lambda row: (-row[1].ndcg, row[0].lam1, row[0].lam2)
    )
    return GridSearchResult(best=best_hp, best_ndcg=best_report.ndcg, table=tuple(rows))


@dataclass(frozen=True)
class SimulationConfig:
    """Simulated-feedback protocol parameters."""

    tags_boosted: int = 1
    clicks: int = 3
    runs: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.tags_boosted not in (1, 2):
            raise ValidationError("tags_boosted must be 1 or 2")
        if not 1 <= self.clicks <= 5:
            raise ValidationError("clicks must be in [1, 5]")
        if self.runs < 1:
            raise ValidationError("runs must be at least 1")


@dataclass(frozen=True)
class SimulationResult:
    static: MetricReport
    interactive: MetricReport
    improvement_percent: float


def _truth_tag_weights(tags: TagMatrix, truth: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Distinct binary tags of the ground-truth items and their occurrence
    counts among those items (the popularity column is not sampled)."""
    counts: dict[int, int] = {}
    for item in truth:
        for tag in tags.binary.row(item):
            counts[tag] = counts.get(tag, 0) + 1
    tag_ids = np.array(sorted(counts), dtype=np.int64)
    weights = np.array([counts[t] for t in tag_ids], dtype=np.float64)
    return tag_ids, weights


def simulate_feedback(
    bundle: ModelBundle, split: EvaluationSplit, config: SimulationConfig
) -> SimulationResult:
    """Compare static ranking against ranking after simulated tag boosts.

    Per user and run, ``tags_boosted`` distinct tags are sampled from the
    tags of that user's ground-truth items (weighted by occurrence count)
    and boosted with ``config.clicks`` positive clicks each. Run metrics
    are averaged per user before aggregating across users.
    """
    n_tags = bundle.tags.n_tags
    ks = DEFAULT_KS
    static_states, truths, kept_users = [], [], []
    for uid, hist, truth in zip(split.user_ids, split.histories, split.ground_truths):
        tag_ids, _ = _truth_tag_weights(bundle.tags, truth)
        if len(tag_ids) == 0:
            log.warning("user %s: ground-truth items have no tags; skipped", uid)
            continue
        static_states.append(UserState(history=hist))
        truths.append(truth)
        kept_users.append(uid)

    static_report = _aggregate(static_states, truths, bundle, ks)

    per_user_recall = {k: [] for k in ks}
    per_user_ndcg = []
    for u, (state, truth) in enumerate(zip(static_states, truths)):
        tag_ids, weights = _truth_tag_weights(bundle.tags, truth)
        truth_set = set(truth)
        run_recall = {k: [] for k in ks}
        run_ndcg = []
        for run in range(config.runs):
            rng = np.random.default_rng((config.seed, u, run))
            n_pick = min(config.tags_boosted, len(tag_ids))
            picked = rng.choice(
                tag_ids, size=n_pick, replace=False, p=weights / weights.sum()
            )
            boosted = state
            for tag in picked:
                for _ in range(config.clicks):
                    boosted = apply_feedback(boosted, int(tag), +1, n_tags)
            topk = rank_for_user(bundle, boosted, max(max(ks), NDCG_K))
            for k in ks:
                run_recall[k].append(recall_at_k(topk, truth_set, k))
            run_ndcg.append(ndcg_at_k(topk, truth_set, NDCG_K))
        for k in ks:
            per_user_recall[k].append(float(np.mean(run_recall[k])))
        per_user_ndcg.append(float(np.mean(run_ndcg)))

    interactive = MetricReport(
        recall={k: float(np.mean(v)) for k, v in per_user_recall.items()},
        ndcg=float(np.mean(per_user_ndcg)),
        per_user_recall={k: np.asarray(v) for k, v in per_user_recall.items()},
        per_user_ndcg=np.asarray(per_user_ndcg),
    )
    improvement = (
        100.0 * (interactive.ndcg - static_report.ndcg) / static_report.ndcg
        if static_report.ndcg > 0
        else 0.0
    )
    return SimulationResult(
        static=static_report, interactive=interactive, improvement_percent=improvement
    )
