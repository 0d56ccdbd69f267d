"""Delimited report output and the figures rendered alongside it."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .data import InteractionDataset, TagMatrix
from .evaluation import MetricReport

REPORT_COLUMNS = ["model", "scenario", "recall@20", "recall@100", "ndcg@100", "improvement%"]


def report_row(model: str, scenario: str, report: MetricReport, improvement: float | None = None) -> dict:
    return {
        "model": model,
        "scenario": scenario,
        "recall@20": f"{report.recall.get(20, float('nan')):.6f}",
        "recall@100": f"{report.recall.get(100, float('nan')):.6f}",
        "ndcg@100": f"{report.ndcg:.6f}",
        "improvement%": "" if improvement is None else f"{improvement:.2f}",
    }


def write_report_csv(path, rows: Sequence[dict]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def dataset_hash(ds: InteractionDataset, tags: TagMatrix | None = None) -> str:
    """Stable content hash over the interaction matrix (and tags if given)."""
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(ds.matrix.indptr).tobytes())
    h.update(np.ascontiguousarray(ds.matrix.indices).tobytes())
    h.update("|".join(ds.item_ids).encode("utf-8"))
    if tags is not None:
        h.update(np.ascontiguousarray(tags.binary.indices).tobytes())
        h.update(np.ascontiguousarray(tags.popularity).tobytes())
    return h.hexdigest()


def write_manifest(path, manifest: dict) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True), encoding="utf-8")


def plot_metric_bars(rows: Sequence[dict], out_path) -> None:
    """Grouped bars of the three ranking metrics per report row."""
    metrics = ["recall@20", "recall@100", "ndcg@100"]
    labels = [f"{r['model']} ({r['scenario']})" for r in rows]
    x = np.arange(len(rows))
    width = 0.25
    fig, ax = plt.subplots(figsize=(max(6, 1.5 * len(rows)), 4))
    for i, metric in enumerate(metrics):
        vals = [float(r[metric]) for r in rows]
        ax.bar(x + (i - 1) * width, vals, width, label=metric)
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_ylabel("metric value")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


def plot_grid_heatmap(table, out_path) -> None:
    """nDCG@100 over the (lam1, lam2) grid; extra axes are flattened."""
    lam1s = sorted({hp.lam1 for hp, _ in table})
    lam2s = sorted({hp.lam2 for hp, _ in table})
    grid = np.full((len(lam1s), len(lam2s)), np.nan)
    for hp, rep in table:
        grid[lam1s.index(hp.lam1), lam2s.index(hp.lam2)] = rep.ndcg
    fig, ax = plt.subplots(figsize=(1.2 * len(lam2s) + 3, 1.0 * len(lam1s) + 2))
    im = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis")
    ax.set_xticks(range(len(lam2s)), [f"{v:g}" for v in lam2s])
    ax.set_yticks(range(len(lam1s)), [f"{v:g}" for v in lam1s])
    ax.set_xlabel("lam2")
    ax.set_ylabel("lam1")
    fig.colorbar(im, ax=ax, label="validation nDCG@100")
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


def plot_improvement(rows: Sequence[dict], out_path) -> None:
    """Relative nDCG improvement per simulated scenario."""
    rows = [r for r in rows if r["improvement%"]]
    fig, ax = plt.subplots(figsize=(max(5, 1.5 * len(rows)), 4))
    labels = [f"{r['model']} ({r['scenario']})" for r in rows]
    vals = [float(r["improvement%"]) for r in rows]
    ax.bar(labels, vals, color="tab:blue")
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_ylabel("nDCG@100 improvement over static (%)")
    plt.setp(ax.get_xticklabels(), rotation=20, ha="right")
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
