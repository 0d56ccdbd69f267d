"""End-to-end data preparation shared by the CLI commands and the service."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import (
    BinningConfig,
    EvaluationSplit,
    InteractionDataset,
    SplitSpec,
    TagMatrix,
    drop_items,
    encode_tags,
    item_interaction_counts,
    load_interactions,
    load_metadata,
    split_strong_generalization,
)
from .errors import ValidationError

log = logging.getLogger(__name__)

# Metadata categories served as display fields, never encoded as tags.
DISPLAY_CATEGORIES = {"title", "description"}


@dataclass(frozen=True)
class PreparedData:
    dataset: InteractionDataset
    train: InteractionDataset
    validation: EvaluationSplit
    test: EvaluationSplit
    tags: TagMatrix
    item_display: dict[str, dict[str, str]]


def load_binning_config(path) -> BinningConfig:
    """Read a JSON mapping of numeric categories to bin edge lists."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    edges = {}
    for category, cuts in raw.items():
        cuts = sorted(float(c) for c in cuts)
        if not cuts:
            raise ValidationError(f"empty bin edges for category {category!r}")
        edges[category] = tuple(cuts)
    return BinningConfig(edges=edges)


def split_display_metadata(records):
    """Separate display-only records (title/description) from tag records."""
    tag_records, display = [], {}
    for item_id, category, value in records:
        if category in DISPLAY_CATEGORIES:
            display.setdefault(item_id, {})[category] = value
        else:
            tag_records.append((item_id, category, value))
    return tag_records, display


def prepare(
    interactions_path,
    metadata_path,
    bins_path=None,
    split: SplitSpec | None = None,
    min_tag_count: int = 5,
) -> PreparedData:
    """Load, filter, split and encode a dataset.

    Items whose tags would all be dropped by the frequency filter are
    removed from the interactions (with a warning) before splitting. The
    popularity column counts training-partition events only.
    """
    split = split or SplitSpec()
    config = load_binning_config(bins_path) if bins_path else BinningConfig()
    ds = load_interactions(interactions_path)
    records = load_metadata(metadata_path)
    tag_records, item_display = split_display_metadata(records)

    # Iterate the tagless-item pre-filter to a fixed point: dropping items
    # lowers tag counts, which can push further tags below the threshold.
    while True:
        tagless = _tagless_items(tag_records, ds, config, min_tag_count)
        if not tagless:
            break
        log.warning("dropping %d items without frequent tags: %s", len(tagless), tagless[:10])
        ds = drop_items(ds, tagless)

    train, validation, test = split_strong_generalization(ds, split)
    counts = item_interaction_counts(train.matrix)
    tags = encode_tags(
        tag_records, ds, config, min_tag_count=min_tag_count, popularity_counts=counts
    )
    return PreparedData(
        dataset=ds,
        train=train,
        validation=validation,
        test=test,
        tags=tags,
        item_display=item_display,
    )


def _tagless_items(tag_records, ds: InteractionDataset, config, min_tag_count) -> list[str]:
    item_index = ds.item_index
    item_tags: dict[int, set] = {i: set() for i in range(ds.n_items)}
    tag_count: dict[tuple[str, str], set[int]] = {}
    for item_id, category, value in tag_records:
        idx = item_index.get(item_id)
        if idx is None:
            continue
        label = config.bin_label(category, value) if config.is_numeric(category) else value
        item_tags[idx].add((category, label))
        tag_count.setdefault((category, label), set()).add(idx)
    kept = {k for k, items in tag_count.items() if len(items) >= min_tag_count}
    return [ds.item_ids[i] for i, tags_ in item_tags.items() if not (tags_ & kept)]
