"""Command-line interface: ingest, train, evaluate, simulate, serve."""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

import click
import numpy as np

from . import model_io, report
from .data import SplitSpec
from .ease import train_ease
from .errors import TagrecError
from .evaluation import (
    ModelBundle,
    SimulationConfig,
    evaluate as run_evaluate,
    grid_search as run_grid_search,
    simulate_feedback,
)
from .pipeline import prepare
from .solver import Hyperparams, train as train_encoder
from .synthetic import planted_preference_events

log = logging.getLogger(__name__)


def _split_options(fn):
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--val-fraction", type=float, default=0.1, show_default=True)(fn)
    fn = click.option("--test-fraction", type=float, default=0.1, show_default=True)(fn)
    fn = click.option("--min-interactions", type=int, default=5, show_default=True)(fn)
    return fn


def _data_options(fn):
    fn = click.option("--interactions", type=click.Path(exists=True), required=True)(fn)
    fn = click.option("--metadata", type=click.Path(exists=True), required=True)(fn)
    fn = click.option("--bins", type=click.Path(exists=True), default=None)(fn)
    fn = click.option("--min-tag-count", type=int, default=5, show_default=True)(fn)
    return fn


def _make_split(seed, val_fraction, test_fraction, min_interactions) -> SplitSpec:
    return SplitSpec(
        train_fraction=1.0 - val_fraction - test_fraction,
        validation_fraction=val_fraction,
        test_fraction=test_fraction,
        min_interactions=min_interactions,
        seed=seed,
    )


def _prepare(interactions, metadata, bins, min_tag_count, split):
    return prepare(interactions, metadata, bins, split=split, min_tag_count=min_tag_count)


@click.group()
@click.option("--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose):
    """Transparent tag-space recommender toolkit."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO)


@main.command()
@_data_options
@_split_options
@click.option("--out", type=click.Path(), default=None, help="Write stats JSON here.")
def ingest(interactions, metadata, bins, min_tag_count, seed, val_fraction, test_fraction, min_interactions, out):
    """Validate the input files and report dataset statistics."""
    data = _prepare(interactions, metadata, bins, min_tag_count,
                    _make_split(seed, val_fraction, test_fraction, min_interactions))
    stats = {
        "users": data.dataset.n_users,
        "items": data.dataset.n_items,
        "interactions": data.dataset.matrix.nnz,
        "tags": data.tags.n_tags,
        "categories": list(data.tags.categories),
        "train_users": data.train.n_users,
        "validation_users": data.validation.n_users,
        "test_users": data.test.n_users,
        "dataset_hash": report.dataset_hash(data.dataset, data.tags),
    }
    click.echo(json.dumps(stats, indent=2))
    if out:
        Path(out).write_text(json.dumps(stats, indent=2), encoding="utf-8")


@main.command()
@_data_options
@_split_options
@click.option("--lam1", type=float, default=1.0, show_default=True)
@click.option("--lam2", type=float, default=1.0, show_default=True)
@click.option("--rho", type=float, default=1.0, show_default=True)
@click.option("--max-iterations", type=int, default=500, show_default=True)
@click.option("--tolerance", type=float, default=1e-6, show_default=True)
@click.option("--model-out", type=click.Path(), required=True)
@click.option("--catalog-out", type=click.Path(), required=True)
def train(interactions, metadata, bins, min_tag_count, seed, val_fraction, test_fraction,
          min_interactions, lam1, lam2, rho, max_iterations, tolerance, model_out, catalog_out):
    """Train the tag-space encoder on the training partition."""
    data = _prepare(interactions, metadata, bins, min_tag_count,
                    _make_split(seed, val_fraction, test_fraction, min_interactions))
    hp = Hyperparams(lam1=lam1, lam2=lam2, rho=rho,
                     max_iterations=max_iterations, tolerance=tolerance)
    model = train_encoder(data.train.matrix, data.tags, hp)
    model_io.save_encoder(model_out, model)
    model_io.save_catalog(catalog_out, data.tags, data.dataset.item_ids)
    conv = model.convergence
    click.echo(
        f"trained: {model.n_items} items x {model.n_tags} tags, "
        f"{conv.iterations} iterations, converged={conv.converged}, "
        f"objective={conv.objective:.6g}"
    )


@main.command("train-ease")
@_data_options
@_split_options
@click.option("--regularization", type=float, default=100.0, show_default=True)
@click.option("--model-out", type=click.Path(), required=True)
def train_ease_cmd(interactions, metadata, bins, min_tag_count, seed, val_fraction,
                   test_fraction, min_interactions, regularization, model_out):
    """Train the closed-form item-item baseline on the training partition."""
    data = _prepare(interactions, metadata, bins, min_tag_count,
                    _make_split(seed, val_fraction, test_fraction, min_interactions))
    model = train_ease(data.train.matrix, regularization)
    model_io.save_item_item(model_out, model.b, model.regularization)
    click.echo(f"trained item-item model on {model.n_items} items")


def _load_bundle(model_path, catalog_path, ease_path, ensemble):
    encoder = model_io.load_encoder(model_path)
    tags, item_ids = model_io.load_catalog(catalog_path)
    static = None
    if ease_path:
        from .ease import ItemItemModel

        b, reg = model_io.load_item_item(ease_path)
        static = ItemItemModel(b=b, regularization=reg)
    return ModelBundle(encoder, tags, static=static, use_ensemble=ensemble), item_ids


@main.command("evaluate")
@_data_options
@_split_options
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--catalog", type=click.Path(exists=True), required=True)
@click.option("--ease", "ease_path", type=click.Path(exists=True), default=None)
@click.option("--ensemble", is_flag=True, help="Rank with the geometric-mean ensemble.")
@click.option("--out-dir", type=click.Path(), required=True)
def evaluate_cmd(interactions, metadata, bins, min_tag_count, seed, val_fraction,
                 test_fraction, min_interactions, model_path, catalog, ease_path,
                 ensemble, out_dir):
    """Evaluate a trained model on the held-out test users."""
    data = _prepare(interactions, metadata, bins, min_tag_count,
                    _make_split(seed, val_fraction, test_fraction, min_interactions))
    bundle, _ = _load_bundle(model_path, catalog, ease_path, ensemble)
    result = run_evaluate(bundle, data.test)
    name = "encoder+ensemble" if ensemble else "encoder"
    rows = [report.report_row(name, "static", result)]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report.write_report_csv(out / "report.csv", rows)
    report.plot_metric_bars(rows, out / "metrics.png")
    report.write_manifest(
        out / "manifest.json",
        {
            "seed": seed,
            "dataset_hash": report.dataset_hash(data.dataset, data.tags),
            "model": str(model_path),
            "ensemble": ensemble,
            "test_users": data.test.n_users,
        },
    )
    click.echo(
        f"recall@20={result.recall[20]:.4f} recall@100={result.recall[100]:.4f} "
        f"ndcg@100={result.ndcg:.4f}"
    )


@main.command("grid-search")
@_data_options
@_split_options
@click.option("--lam1-grid", default="0.1,1,10", show_default=True)
@click.option("--lam2-grid", default="0.1,1,10", show_default=True)
@click.option("--rho", type=float, default=1.0, show_default=True)
@click.option("--max-iterations", type=int, default=500, show_default=True)
@click.option("--tolerance", type=float, default=1e-6, show_default=True)
@click.option("--out-dir", type=click.Path(), required=True)
def grid_search_cmd(interactions, metadata, bins, min_tag_count, seed, val_fraction,
                    test_fraction, min_interactions, lam1_grid, lam2_grid, rho,
                    max_iterations, tolerance, out_dir):
    """Grid search over (lam1, lam2) on the validation users."""
    data = _prepare(interactions, metadata, bins, min_tag_count,
                    _make_split(seed, val_fraction, test_fraction, min_interactions))
    grid = [
        Hyperparams(lam1=l1, lam2=l2, rho=rho,
                    max_iterations=max_iterations, tolerance=tolerance)
        for l1 in (float(v) for v in lam1_grid.split(","))
        for l2 in (float(v) for v in lam2_grid.split(","))
    ]
    result = run_grid_search(grid, data.train.matrix, data.tags, data.validation)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [
        report.report_row(f"lam1={hp.lam1:g},lam2={hp.lam2:g}", "validation", rep)
        for hp, rep in result.table
    ]
    report.write_report_csv(out / "grid.csv", rows)
    report.plot_grid_heatmap(result.table, out / "grid.png")
    report.write_manifest(
        out / "manifest.json",
        {
            "seed": seed,
            "dataset_hash": report.dataset_hash(data.dataset, data.tags),
            "grid": [{"lam1": hp.lam1, "lam2": hp.lam2, "rho": hp.rho} for hp in grid],
            "best": {"lam1": result.best.lam1, "lam2": result.best.lam2},
            "best_ndcg": result.best_ndcg,
        },
    )
    click.echo(f"best: lam1={result.best.lam1:g} lam2={result.best.lam2:g} "
               f"ndcg@100={result.best_ndcg:.4f}")


@main.command("simulate")
@_data_options
@_split_options
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--catalog", type=click.Path(exists=True), required=True)
@click.option("--ease", "ease_path", type=click.Path(exists=True), default=None)
@click.option("--ensemble", is_flag=True)
@click.option("--tags-boosted", type=click.IntRange(1, 2), default=1, show_default=True)
@click.option("--clicks", type=click.IntRange(1, 5), default=3, show_default=True)
@click.option("--runs", type=int, default=3, show_default=True)
@click.option("--sim-seed", type=int, default=0, show_default=True)
@click.option("--out-dir", type=click.Path(), required=True)
def simulate_cmd(interactions, metadata, bins, min_tag_count, seed, val_fraction,
                 test_fraction, min_interactions, model_path, catalog, ease_path,
                 ensemble, tags_boosted, clicks, runs, sim_seed, out_dir):
    """Simulated-feedback evaluation on the test users."""
    data = _prepare(interactions, metadata, bins, min_tag_count,
                    _make_split(seed, val_fraction, test_fraction, min_interactions))
    bundle, _ = _load_bundle(model_path, catalog, ease_path, ensemble)
    config = SimulationConfig(tags_boosted=tags_boosted, clicks=clicks, runs=runs, seed=sim_seed)
    result = simulate_feedback(bundle, data.test, config)
    name = "encoder+ensemble" if ensemble else "encoder"
    rows = [
        report.report_row(name, "static", result.static),
        report.report_row(
            name,
            f"{tags_boosted}-tag +{clicks}-click",
            result.interactive,
            result.improvement_percent,
        ),
    ]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report.write_report_csv(out / "simulation.csv", rows)
    report.plot_metric_bars(rows, out / "simulation.png")
    report.plot_improvement(rows, out / "improvement.png")
    report.write_manifest(
        out / "manifest.json",
        {
            "seed": seed,
            "sim_seed": sim_seed,
            "dataset_hash": report.dataset_hash(data.dataset, data.tags),
            "tags_boosted": tags_boosted,
            "clicks": clicks,
            "runs": runs,
        },
    )
    click.echo(f"static ndcg@100={result.static.ndcg:.4f} "
               f"interactive ndcg@100={result.interactive.ndcg:.4f} "
               f"improvement={result.improvement_percent:.1f}%")


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--catalog", type=click.Path(exists=True), required=True)
@click.option("--metadata", type=click.Path(exists=True), default=None,
              help="Metadata CSV for item display fields.")
@click.option("--ease", "ease_path", type=click.Path(exists=True), default=None)
@click.option("--session-log", type=click.Path(), default="sessions.jsonl", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(model_path, catalog, metadata, ease_path, session_log, host, port):
    """Run the interactive recommendation service."""
    import uvicorn

    from .data import load_metadata
    from .pipeline import split_display_metadata
    from .service import create_app

    bundle, item_ids = _load_bundle(model_path, catalog, ease_path, ensemble=False)
    item_display = {}
    if metadata:
        _, item_display = split_display_metadata(load_metadata(metadata))
    app = create_app(bundle, item_ids, item_display, session_log)
    uvicorn.run(app, host=host, port=port)


@main.command("synth-data")
@click.option("--out-dir", type=click.Path(), required=True)
@click.option("--users", type=int, default=200, show_default=True)
@click.option("--items", type=int, default=100, show_default=True)
@click.option("--tags", "n_tags", type=int, default=20, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def synth_data(out_dir, users, items, n_tags, seed):
    """Write a synthetic planted-preference dataset as CSV files."""
    events, metadata = planted_preference_events(
        n_users=users, n_items=items, n_tags=n_tags, seed=seed
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "interactions.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "item_id"])
        writer.writerows(events)
    with (out / "metadata.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["item_id", "category", "value"])
        writer.writerows(metadata)
    click.echo(f"wrote {len(events)} interactions and {len(metadata)} metadata rows to {out}")


if __name__ == "__main__":
    main()
