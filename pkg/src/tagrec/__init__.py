"""Transparent tag-space recommender: encoder training, explanations,
interactive steering, offline evaluation and an HTTP service."""

__version__ = "0.1.0"
