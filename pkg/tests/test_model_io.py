import numpy as np
import pytest

from helpers import random_instance
from tagrec import model_io
from tagrec.errors import ValidationError
from tagrec.solver import Hyperparams, train


def test_encoder_round_trip_bit_exact(tmp_path):
    x, d = random_instance(0)
    model = train(x, d, Hyperparams(lam1=0.7, lam2=1.3, rho=2.0, tolerance=1e-8))
    path = tmp_path / "model.bin"
    model_io.save_encoder(path, model)
    loaded = model_io.load_encoder(path)
    assert loaded.e.tobytes() == model.e.tobytes()
    assert loaded.hyperparams == model.hyperparams
    assert loaded.vocabulary == model.vocabulary
    assert loaded.convergence == model.convergence


def test_save_load_save_identical_bytes(tmp_path):
    x, d = random_instance(1)
    model = train(x, d, Hyperparams())
    p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
    model_io.save_encoder(p1, model)
    model_io.save_encoder(p2, model_io.load_encoder(p1))
    assert p1.read_bytes() == p2.read_bytes()


def test_item_item_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    b = rng.standard_normal((5, 5))
    np.fill_diagonal(b, 0.0)
    path = tmp_path / "ease.bin"
    model_io.save_item_item(path, b, 12.5)
    loaded, reg = model_io.load_item_item(path)
    assert loaded.tobytes() == b.tobytes()
    assert reg == 12.5


def test_kind_mismatch_rejected(tmp_path):
    path = tmp_path / "ease.bin"
    model_io.save_item_item(path, np.zeros((2, 2)), 1.0)
    with pytest.raises(ValidationError):
        model_io.load_encoder(path)


def test_garbage_rejected(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"not a model")
    with pytest.raises(ValidationError):
        model_io.load_encoder(path)


def test_catalog_round_trip(tmp_path, synthetic_data):
    path = tmp_path / "catalog.npz"
    model_io.save_catalog(path, synthetic_data.tags, synthetic_data.dataset.item_ids)
    tags, item_ids = model_io.load_catalog(path)
    assert item_ids == synthetic_data.dataset.item_ids
    assert tags.vocabulary == synthetic_data.tags.vocabulary
    np.testing.assert_array_equal(tags.binary.indices, synthetic_data.tags.binary.indices)
    np.testing.assert_array_equal(tags.popularity, synthetic_data.tags.popularity)
