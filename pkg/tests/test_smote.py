import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quchater.config import Config
from quchater.errors import TooFewMinoritySamples
from quchater.ingest import load_earthquakes
from quchater.preprocess import smote_oversample
from quchater.preprocess.pipeline import feature_matrix


def on_some_segment(s, pool, tol=1e-9):
    """Oracle: ``s == a + lam (b - a)`` for some pool rows a != b and lam in [0, 1]."""
    a = pool[:, None, :]
    d = pool[None, :, :] - a
    dd = (d ** 2).sum(-1)
    lam = np.where(dd > 0, ((s - a) * d).sum(-1) / np.where(dd > 0, dd, 1), 0.0)
    ok_lam = (lam >= -tol) & (lam <= 1 + tol)
    resid = np.linalg.norm(a + lam[..., None] * d - s, axis=-1)
    scale = max(1.0, np.abs(s).max())
    return bool(np.any(ok_lam & (resid <= tol * scale)))


def test_earthquakes_balance_and_segment_membership():
    ds = load_earthquakes("train")
    X = feature_matrix(ds, Config())
    Xo, yo = smote_oversample(X, ds.labels, 5, 0)
    assert np.bincount(yo).tolist() == [264, 264]
    np.testing.assert_array_equal(Xo[:len(X)], X)
    pool = X[ds.labels == 1]
    synth = Xo[len(X):]
    assert len(synth) == 206
    assert all(on_some_segment(s, pool) for s in synth)


def test_balanced_input_is_unchanged():
    X = np.arange(12.0).reshape(6, 2)
    y = np.array([0, 1, 0, 1, 0, 1])
    Xo, yo = smote_oversample(X, y)
    np.testing.assert_array_equal(Xo, X)
    np.testing.assert_array_equal(yo, y)


def test_seed_determinism():
    rng = np.random.default_rng(0)
    X, y = rng.normal(size=(30, 3)), np.array([0] * 22 + [1] * 8)
    a = smote_oversample(X, y, 3, 9)
    b = smote_oversample(X, y, 3, 9)
    assert a[0].tobytes() == b[0].tobytes()


def test_too_few_minority():
    with pytest.raises(TooFewMinoritySamples):
        smote_oversample(np.zeros((6, 2)), np.array([0, 0, 0, 0, 1, 1]), k_neighbors=5)


@settings(max_examples=25, deadline=None)
@given(st.integers(6, 12), st.integers(1, 20), st.integers(0, 2**31 - 1))
def test_property_balance_and_hull(n_min, extra, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(2 * n_min + extra, 3))
    y = np.array([1] * n_min + [0] * (n_min + extra))
    Xo, yo = smote_oversample(X, y, 5, seed)
    assert (yo == 0).sum() == (yo == 1).sum()
    pool = X[y == 1]
    assert all(on_some_segment(s, pool) for s in Xo[len(X):])
