"""Dataset ingestion: interactions, tag encoding and evaluation splits."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError
from .linalg import SparseBinaryMatrix

log = logging.getLogger(__name__)

POPULARITY_CATEGORY = "popularity"
POPULARITY_LABEL = "popularity"


@dataclass(frozen=True)
class InteractionDataset:
    """Deduplicated binary user-item interactions with id mappings."""

    user_ids: tuple[str, ...]
    item_ids: tuple[str, ...]
    matrix: SparseBinaryMatrix  # users x items

    @property
    def n_users(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_items(self) -> int:
        return self.matrix.shape[1]

    @property
    def user_index(self) -> dict[str, int]:
        return {u: i for i, u in enumerate(self.user_ids)}

    @property
    def item_index(self) -> dict[str, int]:
        return {it: i for i, it in enumerate(self.item_ids)}


@dataclass(frozen=True)
class TagMatrix:
    """One-hot item metadata plus a popularity column.

    The binary part holds the one-hot tags; the popularity column is a
    dense vector in [0, 1] (interaction count / max count) appended as the
    last column of the dense form.
    """

    binary: SparseBinaryMatrix  # items x binary tags
    popularity: np.ndarray  # items
    vocabulary: tuple[tuple[str, str], ...]  # (category, label) incl. popularity last

    def __post_init__(self):
        n, t_bin = self.binary.shape
        if len(self.popularity) != n:
            raise ValidationError("popularity length mismatch")
        if len(self.vocabulary) != t_bin + 1:
            raise ValidationError("vocabulary length must be binary tags + popularity")
        seen = set()
        for cat, label in self.vocabulary:
            if (cat, label) in seen:
                raise ValidationError(f"duplicate tag {label!r} in category {cat!r}")
            seen.add((cat, label))

    @property
    def n_items(self) -> int:
        return self.binary.shape[0]

    @property
    def n_tags(self) -> int:
        """Total tag count including the popularity column."""
        return self.binary.shape[1] + 1

    @property
    def categories(self) -> tuple[str, ...]:
        out = []
        for cat, _ in self.vocabulary:
            if cat not in out:
                out.append(cat)
        return tuple(out)

    def tag_category(self, tag: int) -> str:
        return self.vocabulary[tag][0]

    def tag_name(self, tag: int) -> str:
        cat, label = self.vocabulary[tag]
        return f"{cat}:{label}"

    def dense(self) -> np.ndarray:
        """Dense decoder matrix: binary tags with the popularity column last.

        Memoized; treat the returned array as read-only.
        """
        cached = getattr(self, "_dense_cache", None)
        if cached is None:
            cached = np.zeros((self.n_items, self.n_tags), dtype=np.float64)
            cached[:, :-1] = self.binary.to_dense()
            cached[:, -1] = self.popularity
            object.__setattr__(self, "_dense_cache", cached)
        return cached


@dataclass(frozen=True)
class SplitSpec:
    """Strong-generalization split configuration (fractions of users)."""

    train_fraction: float = 0.8
    validation_fraction: float = 0.1
    test_fraction: float = 0.1
    min_interactions: int = 5
    history_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train_fraction, self.validation_fraction, self.test_fraction)
        if any(f <= 0 for f in fracs) or abs(sum(fracs) - 1.0) > 1e-9:
            raise ValidationError("split fractions must be positive and sum to 1")
        if not 0.0 < self.history_fraction < 1.0:
            raise ValidationError("history fraction must be in (0, 1)")


@dataclass(frozen=True)
class EvaluationSplit:
    """Held-out users with disjoint history / ground-truth item sets."""

    user_ids: tuple[str, ...]
    histories: tuple[tuple[int, ...], ...]
    ground_truths: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for uid, hist, truth in zip(self.user_ids, self.histories, self.ground_truths):
            if not truth:
                raise ValidationError(f"user {uid!r}: empty ground truth")
            if set(hist) & set(truth):
                raise ValidationError(f"user {uid!r}: history overlaps ground truth")

    @property
    def n_users(self) -> int:
        return len(self.user_ids)


def load_interactions(source) -> InteractionDataset:
    """Build an :class:`InteractionDataset` from (user_id, item_id) events.

    ``source`` is a path to a CSV file with header ``user_id,item_id`` or an
    iterable of (user, item) pairs. Duplicates are collapsed; indices are
    assigned in first-seen order.
    """
    if isinstance(source, (str, Path)):
        pairs = _read_interaction_csv(Path(source))
    else:
        pairs = [(str(u), str(i)) for u, i in source]
    if not pairs:
        raise ValidationError("no interactions in input")

    user_ids: list[str] = []
    item_ids: list[str] = []
    user_index: dict[str, int] = {}
    item_index: dict[str, int] = {}
    per_user: list[set[int]] = []
    for u, it in pairs:
        if u not in user_index:
            user_index[u] = len(user_ids)
            user_ids.append(u)
            per_user.append(set())
        if it not in item_index:
            item_index[it] = len(item_ids)
            item_ids.append(it)
        per_user[user_index[u]].add(item_index[it])

    matrix = SparseBinaryMatrix.from_rows([sorted(s) for s in per_user], len(item_ids))
    return InteractionDataset(tuple(user_ids), tuple(item_ids), matrix)


def _read_interaction_csv(path: Path) -> list[tuple[str, str]]:
    pairs = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValidationError(f"{path}: empty file")
        if [h.strip() for h in header[:2]] != ["user_id", "item_id"]:
            raise ValidationError(f"{path}: expected header 'user_id,item_id'")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 2 or not row[0].strip() or not row[1].strip():
                raise ValidationError(f"{path}:{lineno}: malformed row {row!r}")
            pairs.append((row[0].strip(), row[1].strip()))
    return pairs


def load_metadata(source) -> list[tuple[str, str, str]]:
    """Read (item_id, category, value) records from a CSV file or iterable."""
    if not isinstance(source, (str, Path)):
        return [(str(a), str(b), str(c)) for a, b, c in source]
    path = Path(source)
    records = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValidationError(f"{path}: empty file")
        if [h.strip() for h in header[:3]] != ["item_id", "category", "value"]:
            raise ValidationError(f"{path}: expected header 'item_id,category,value'")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 3 or not row[0].strip() or not row[1].strip():
                raise ValidationError(f"{path}:{lineno}: malformed row {row!r}")
            records.append((row[0].strip(), row[1].strip(), row[2].strip()))
    return records


@dataclass(frozen=True)
class BinningConfig:
    """Bin edges for numeric metadata categories.

    ``edges[category]`` is a sorted list of cut points; values are mapped to
    half-open bins labelled ``<e0``, ``e0-e1``, ..., ``>=eN``.
    """

    edges: dict[str, tuple[float, ...]] = field(default_factory=dict)

    def is_numeric(self, category: str) -> bool:
        return category in self.edges

    def bin_label(self, category: str, value: str) -> str:
        cuts = self.edges[category]
        try:
            x = float(value)
        except ValueError as exc:
            raise ValidationError(f"non-numeric value {value!r} for binned category {category!r}") from exc
        for i, edge in enumerate(cuts):
            if x < edge:
                return f"<{_fmt(cuts[0])}" if i == 0 else f"{_fmt(cuts[i-1])}-{_fmt(edge)}"
        return f">={_fmt(cuts[-1])}"


def _fmt(x: float) -> str:
    return f"{x:g}"


def encode_tags(
    metadata: Iterable[tuple[str, str, str]],
    interactions: InteractionDataset,
    config: BinningConfig | None = None,
    min_tag_count: int = 5,
    popularity_counts: np.ndarray | None = None,
) -> TagMatrix:
    """One-hot encode item metadata and append the popularity column.

    Numeric categories listed in ``config`` are discretized to bins first.
    Tags occurring on fewer than ``min_tag_count`` items are dropped; items
    left without any tag raise a :class:`ValidationError` (callers that want
    those items gone should filter them with :func:`drop_items` first).

    ``popularity_counts`` overrides the per-item interaction counts used for
    the popularity column, e.g. to count only training-partition events.
    """
    config = config or BinningConfig()
    item_index = interactions.item_index
    n = interactions.n_items

    item_tags: list[set[tuple[str, str]]] = [set() for _ in range(n)]
    tag_items: dict[tuple[str, str], set[int]] = {}
    for item_id, category, value in metadata:
        idx = item_index.get(item_id)
        if idx is None:
            continue  # metadata for unknown items is ignored
        label = config.bin_label(category, value) if config.is_numeric(category) else value
        key = (category, label)
        item_tags[idx].add(key)
        tag_items.setdefault(key, set()).add(idx)

    missing = [interactions.item_ids[i] for i in range(n) if not item_tags[i]]
    if missing:
        raise ValidationError(f"items without metadata records: {missing[:20]}")

    kept = sorted(k for k, items in tag_items.items() if len(items) >= min_tag_count)
    if not kept:
        raise ValidationError("no tags left after frequency filtering")
    kept_set = set(kept)
    tagless = [interactions.item_ids[i] for i in range(n) if not (item_tags[i] & kept_set)]
    if tagless:
        raise ValidationError(f"items without tags after filtering: {tagless[:20]}")

    tag_pos = {k: j for j, k in enumerate(kept)}
    rows = [sorted(tag_pos[k] for k in item_tags[i] if k in kept_set) for i in range(n)]
    binary = SparseBinaryMatrix.from_rows(rows, len(kept))

    if popularity_counts is None:
        counts = np.zeros(n, dtype=np.float64)
        np.add.at(counts, interactions.matrix.indices, 1.0)
    else:
        counts = np.asarray(popularity_counts, dtype=np.float64)
        if counts.shape != (n,):
            raise ValidationError("popularity_counts length mismatch")
    top = counts.max(initial=0.0)
    popularity = counts / top if top > 0 else counts

    vocabulary = tuple(kept) + ((POPULARITY_CATEGORY, POPULARITY_LABEL),)
    return TagMatrix(binary=binary, popularity=popularity, vocabulary=vocabulary)


def item_interaction_counts(matrix: SparseBinaryMatrix) -> np.ndarray:
    """Per-item interaction counts of a user x item matrix."""
    counts = np.zeros(matrix.shape[1], dtype=np.float64)
    np.add.at(counts, matrix.indices, 1.0)
    return counts


def drop_items(ds: InteractionDataset, item_ids: Sequence[str]) -> InteractionDataset:
    """Remove the given items (reindexing) and any user left empty."""
    doomed = set(item_ids)
    keep = [i for i, it in enumerate(ds.item_ids) if it not in doomed]
    remap = {old: new for new, old in enumerate(keep)}
    rows, users = [], []
    for u in range(ds.n_users):
        row = [remap[c] for c in ds.matrix.row(u) if c in remap]
        if row:
            rows.append(row)
            users.append(ds.user_ids[u])
    if not rows:
        raise ValidationError("dropping items removed every interaction")
    matrix = SparseBinaryMatrix.from_rows(rows, len(keep))
    return InteractionDataset(tuple(users), tuple(ds.item_ids[i] for i in keep), matrix)


def split_strong_generalization(
    ds: InteractionDataset, spec: SplitSpec
) -> tuple[InteractionDataset, EvaluationSplit, EvaluationSplit]:
    """Partition users into train / validation / test sets.

    Validation and test users are entirely absent from the returned training
    dataset; their interactions are split per user into history
    (``ceil(history_fraction * count)`` items) and ground truth.
    """
    rng = np.random.default_rng(spec.seed)
    m = ds.n_users
    counts = np.diff(ds.matrix.indptr)
    eligible = [u for u in range(m) if counts[u] >= spec.min_interactions]
    n_val = max(1, int(round(spec.validation_fraction * m)))
    n_test = max(1, int(round(spec.test_fraction * m)))
    if len(eligible) < n_val + n_test:
        raise ValidationError(
            f"not enough users with >= {spec.min_interactions} interactions: "
            f"need {n_val + n_test}, have {len(eligible)}"
        )
    order = rng.permutation(len(eligible))
    val_users = sorted(eligible[i] for i in order[:n_val])
    test_users = sorted(eligible[i] for i in order[n_val:n_val + n_test])
    held_out = set(val_users) | set(test_users)

    train_rows = [list(ds.matrix.row(u)) for u in range(m) if u not in held_out]
    train_user_ids = tuple(ds.user_ids[u] for u in range(m) if u not in held_out)
    train = InteractionDataset(
        train_user_ids,
        ds.item_ids,
        SparseBinaryMatrix.from_rows(train_rows, ds.n_items),
    )

    def build(users: list[int]) -> EvaluationSplit:
        ids, hists, truths = [], [], []
        for u in users:
            items = np.array(ds.matrix.row(u))
            perm = np.random.default_rng((spec.seed, u)).permutation(len(items))
            n_hist = min(math.ceil(spec.history_fraction * len(items)), len(items) - 1)
            hists.append(tuple(int(i) for i in items[perm[:n_hist]]))
            truths.append(tuple(int(i) for i in items[perm[n_hist:]]))
            ids.append(ds.user_ids[u])
        return EvaluationSplit(tuple(ids), tuple(hists), tuple(truths))

    return train, build(val_users), build(test_users)
