"""Closed-form item-item regression baseline.

B = I - P dm(1/diag(P)) with P = (X^T X + reg I)^{-1}; the diagonal of B
is exactly zero. Dense inverse: cubic in the item count, fine at the
scales this package targets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .linalg import gram


@dataclass(frozen=True)
class ItemItemModel:
    b: np.ndarray  # n x n, zero diagonal
    regularization: float

    @property
    def n_items(self) -> int:
        return self.b.shape[0]


def train_ease(x, regularization: float) -> ItemItemModel:
    """Fit the closed-form item-item model on interactions ``x``."""
    if regularization <= 0:
        raise ValidationError("regularization must be strictly positive")
    g = gram(x)
    g[np.diag_indices_from(g)] += regularization
    p = np.linalg.inv(g)
    b = -p / np.diag(p)[None, :]
    np.fill_diagonal(b, 0.0)
    return ItemItemModel(b=b, regularization=regularization)


def score_ease(history: Sequence[int], model: ItemItemModel) -> np.ndarray:
    """Scores x^T B for a binary history row (empty history scores zero)."""
    scores = np.zeros(model.n_items)
    for item in history:
        scores += model.b[item]
    return scores
