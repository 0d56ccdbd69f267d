"""Model container files.

Layout: a magic line, an 8-byte little-endian header length, a JSON header
(format version, kind, shape, hyperparameters, tag vocabulary, convergence
report) and the weight matrix as little-endian float64 in row-major order.
Round-trips are bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .solver import ConvergenceReport, EncoderModel, Hyperparams

MAGIC = b"TAGREC-MODEL\n"
FORMAT_VERSION = 1

KIND_ENCODER = "encoder"
KIND_ITEM_ITEM = "item_item"


def _write_container(path, kind: str, matrix: np.ndarray, header_extra: dict) -> None:
    matrix = np.ascontiguousarray(matrix, dtype="<f8")
    header = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "rows": int(matrix.shape[0]),
        "cols": int(matrix.shape[1]),
    }
    header.update(header_extra)
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(len(blob).to_bytes(8, "little"))
        fh.write(blob)
        fh.write(matrix.tobytes())


def _read_container(path) -> tuple[dict, np.ndarray]:
    raw = Path(path).read_bytes()
    if not raw.startswith(MAGIC):
        raise ValidationError(f"{path}: not a model container")
    off = len(MAGIC)
    hlen = int.from_bytes(raw[off:off + 8], "little")
    off += 8
    header = json.loads(raw[off:off + hlen].decode("utf-8"))
    off += hlen
    if header.get("format_version") != FORMAT_VERSION:
        raise ValidationError(f"{path}: unsupported format version")
    rows, cols = header["rows"], header["cols"]
    matrix = np.frombuffer(raw[off:], dtype="<f8")
    if matrix.size != rows * cols:
        raise ValidationError(f"{path}: payload size mismatch")
    return header, matrix.reshape(rows, cols).copy()


def save_encoder(path, model: EncoderModel) -> None:
    hp = model.hyperparams
    _write_container(
        path,
        KIND_ENCODER,
        model.e,
        {
            "hyperparams": {
                "lam1": hp.lam1,
                "lam2": hp.lam2,
                "rho": hp.rho,
                "max_iterations": hp.max_iterations,
                "tolerance": hp.tolerance,
            },
            "vocabulary": [list(v) for v in model.vocabulary],
            "convergence": {
                "iterations": model.convergence.iterations,
                "converged": model.convergence.converged,
                "primal_residual": model.convergence.primal_residual,
                "objective": model.convergence.objective,
            },
        },
    )


def load_encoder(path) -> EncoderModel:
    header, matrix = _read_container(path)
    if header["kind"] != KIND_ENCODER:
        raise ValidationError(f"{path}: expected an encoder model")
    hp = Hyperparams(**header["hyperparams"])
    conv = ConvergenceReport(**header["convergence"])
    vocab = tuple((c, l) for c, l in header["vocabulary"])
    return EncoderModel(e=matrix, vocabulary=vocab, hyperparams=hp, convergence=conv)


def save_catalog(path, tags, item_ids: tuple[str, ...]) -> None:
    """Persist a tag matrix plus the item id ordering it was built on."""
    np.savez(
        path,
        n_items=tags.binary.shape[0],
        n_binary_tags=tags.binary.shape[1],
        indptr=tags.binary.indptr,
        indices=tags.binary.indices,
        popularity=tags.popularity,
        categories=np.array([c for c, _ in tags.vocabulary], dtype=object),
        labels=np.array([l for _, l in tags.vocabulary], dtype=object),
        item_ids=np.array(list(item_ids), dtype=object),
    )


def load_catalog(path):
    from .data import TagMatrix
    from .linalg import SparseBinaryMatrix

    with np.load(path, allow_pickle=True) as z:
        binary = SparseBinaryMatrix(
            (int(z["n_items"]), int(z["n_binary_tags"])), z["indptr"], z["indices"]
        )
        vocabulary = tuple(zip(z["categories"].tolist(), z["labels"].tolist()))
        tags = TagMatrix(binary=binary, popularity=z["popularity"], vocabulary=vocabulary)
        item_ids = tuple(z["item_ids"].tolist())
    return tags, item_ids


def save_item_item(path, b: np.ndarray, regularization: float) -> None:
    _write_container(path, KIND_ITEM_ITEM, b, {"regularization": regularization})


def load_item_item(path) -> tuple[np.ndarray, float]:
    header, matrix = _read_container(path)
    if header["kind"] != KIND_ITEM_ITEM:
        raise ValidationError(f"{path}: expected an item-item model")
    return matrix, float(header["regularization"])
