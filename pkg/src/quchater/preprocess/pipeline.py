"""End-to-end preprocessing: raw datasets to model-ready sequences."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from ..config import Config
from ..ingest import TimeSeriesDataset, load_dataset, load_earthquakes, split_train_val
from .features import (
    FeatureLayout,
    apply_standardizer,
    feature_layout,
    fit_standardizer,
    series_features,
    to_sequences,
)
from .smote import smote_oversample


@dataclass
class Split:
    X: np.ndarray  # (n, steps, step_dim) sequences
    y: np.ndarray
    flat: np.ndarray  # standardized feature vectors

    def __len__(self) -> int:
        return len(self.y)


@dataclass
class PreparedData:
    train: Split
    val: Split
    test: Split
    layout: FeatureLayout
    mean: np.ndarray
    std: np.ndarray
    test_digest: str


def feature_matrix(ds: TimeSeriesDataset, cfg: Config) -> np.ndarray:
    p = cfg.preprocess
    return np.stack([series_features(s, p.wavelet, p.levels, p.boundary, p.window, p.stride)
                     for s in ds.sequences])


def dataset_digest(ds: TimeSeriesDataset) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(ds.sequences).tobytes())
    h.update(np.ascontiguousarray(ds.labels).tobytes())
    return h.hexdigest()


def load_raw(cfg: Config) -> tuple[TimeSeriesDataset, TimeSeriesDataset]:
    d = cfg.data
    train = load_dataset(d.train_path, d.format, "train") if d.train_path else load_earthquakes("train")
    test = load_dataset(d.test_path, d.format, "test") if d.test_path else load_earthquakes("test")
    return train, test


def prepare(train_ds: TimeSeriesDataset, test_ds: TimeSeriesDataset, cfg: Config) -> PreparedData:
    """Split, featurize, balance the training side with SMOTE and standardize.

    The standardizer is fitted on the balanced training features only;
    validation and test rows reuse those statistics.
    """
    p = cfg.preprocess
    digest = dataset_digest(test_ds)
    tr_ds, va_ds = split_train_val(train_ds, cfg.data.train_fraction, cfg.seed,
                                   stratify=cfg.data.stratify)
    layout = feature_layout(train_ds.length, p.wavelet, p.levels, p.boundary, p.window, p.stride)
    F_tr, F_va, F_te = (feature_matrix(ds, cfg) for ds in (tr_ds, va_ds, test_ds))
    F_tr, y_tr = smote_oversample(F_tr, tr_ds.labels, p.smote_k, cfg.seed)
    mean, std = fit_standardizer(F_tr)

    def make(F, y):
        Z = apply_standardizer(F, mean, std)
        return Split(to_sequences(Z, layout), np.asarray(y, dtype=np.int64), Z)

    return PreparedData(make(F_tr, y_tr), make(F_va, va_ds.labels), make(F_te, test_ds.labels),
                        layout, mean, std, digest)


def prepare_from_config(cfg: Config) -> tuple[PreparedData, TimeSeriesDataset]:
    train_ds, test_ds = load_raw(cfg)
    return prepare(train_ds, test_ds, cfg), test_ds
