"""Synthetic planted-preference data for tests and demos.

Every item carries one topic tag; every user prefers two topics and draws
most of their interactions from items with those topics, plus some noise.
Boosting a preferred topic should therefore visibly improve the ranking of
that user's held-out items.
"""

from __future__ import annotations

import numpy as np


def planted_preference_events(
    n_users: int = 200,
    n_items: int = 100,
    n_tags: int = 20,
    items_per_user: tuple[int, int] = (6, 12),
    noise: float = 0.2,
    seed: int = 0,
) -> tuple[list[tuple[str, str]], list[tuple[str, str, str]]]:
    """Generate (interaction events, metadata records).

    Returns CSV-shaped rows: (user_id, item_id) pairs and
    (item_id, category, value) records with a single ``topic`` category.
    """
    rng = np.random.default_rng(seed)
    item_topic = np.arange(n_items) % n_tags  # balanced topics
    topic_items = [np.nonzero(item_topic == t)[0] for t in range(n_tags)]

    interactions: list[tuple[str, str]] = []
    for u in range(n_users):
        topics = rng.choice(n_tags, size=2, replace=False)
        pool = np.concatenate([topic_items[t] for t in topics])
        count = int(rng.integers(items_per_user[0], items_per_user[1] + 1))
        chosen: set[int] = set()
        while len(chosen) < count:
            if rng.random() < noise:
                chosen.add(int(rng.integers(n_items)))
            else:
                chosen.add(int(rng.choice(pool)))
        for item in sorted(chosen):
            interactions.append((f"u{u}", f"i{item}"))

    metadata = [(f"i{i}", "topic", f"t{item_topic[i]}") for i in range(n_items)]
    return interactions, metadata
