"""Per-series transforms and feature-vector assembly."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import AllMissing, DataError, WindowTooLarge
from .wavelets import dwt_decompose

N_STATS = 5  # mean, std, min, max, energy
STAT_NAMES = ("mean", "std", "min", "max", "energy")


@dataclass
class FeatureVector:
    values: np.ndarray
    label: int


def minmax_normalize(series) -> np.ndarray:
    """Affine map onto [0, 1]; a constant series maps to zeros."""
    x = np.asarray(series, dtype=np.float64)
    lo, hi = x.min(), x.max()
    span = hi - lo
    if span == 0.0:
        return np.zeros_like(x)
    return (x - lo) / span


def impute_missing(series) -> np.ndarray:
    """Fill NaN gaps by linear interpolation; edges copy the nearest valid value."""
    x = np.asarray(series, dtype=np.float64)
    mask = np.isnan(x)
    if not mask.any():
        return x.copy()
    if mask.all():
        raise AllMissing("every entry is missing")
    idx = np.arange(len(x))
    out = x.copy()
    # np.interp clamps outside the valid range, which is the edge-fill rule
    out[mask] = np.interp(idx[mask], idx[~mask], x[~mask])
    return out


def window_starts(length: int, window: int, stride: int) -> np.ndarray:
    if not 1 <= window <= length:
        raise WindowTooLarge(f"window {window} does not fit a series of length {length}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    return np.arange(0, length - window + 1, stride)


def sliding_stats(series, window: int = 64, stride: int = 32) -> np.ndarray:
    """Per-window (mean, std, min, max, mean-square), flattened in window order."""
    x = np.asarray(series, dtype=np.float64)
    starts = window_starts(len(x), window, stride)
    segs = np.stack([x[s:s + window] for s in starts])
    stats = np.stack([segs.mean(1), segs.std(1), segs.min(1), segs.max(1),
                      (segs ** 2).mean(1)], axis=1)
    return stats.ravel()


@dataclass(frozen=True)
class FeatureLayout:
    """Where each block lives inside a feature vector."""

    series_length: int
    band_lengths: tuple  # coarse to fine: a_L, d_L, ..., d_1
    window: int
    stride: int
    n_windows: int

    @property
    def n_wavelet(self) -> int:
        return int(sum(self.band_lengths))

    @property
    def dim(self) -> int:
        return self.n_wavelet + self.n_windows * N_STATS

    @property
    def step_dim(self) -> int:
        return N_STATS + len(self.band_lengths)

    def to_dict(self) -> dict:
        return {"series_length": self.series_length, "band_lengths": list(self.band_lengths),
                "window": self.window, "stride": self.stride, "n_windows": self.n_windows}


def series_features(series, family: str = "db4", levels: int = 3, mode: str = "symmetric",
                    window: int = 64, stride: int = 32) -> np.ndarray:
    """Impute, min-max scale, then concatenate wavelet coefficients and window stats."""
    x = minmax_normalize(impute_missing(series))
    dec = dwt_decompose(x, family, levels, mode)
    return np.concatenate([dec.flatten(), sliding_stats(x, window, stride)])


def feature_layout(length: int, family: str = "db4", levels: int = 3, mode: str = "symmetric",
                   window: int = 64, stride: int = 32) -> FeatureLayout:
    dec = dwt_decompose(np.zeros(length), family, levels, mode)
    n_win = len(window_starts(length, window, stride))
    return FeatureLayout(length, tuple(dec.band_lengths()), window, stride, n_win)


def fit_standardizer(train: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column mean and population std of the training matrix."""
    X = np.asarray(train, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise DataError("standardizer needs a non-empty 2-D training matrix")
    return X.mean(axis=0), X.std(axis=0)


def apply_standardizer(X, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    safe = np.where(std > 0, std, 1.0)
    out = (X - mean) / safe
    out[..., std == 0] = 0.0
    return out


def to_sequences(X: np.ndarray, layout: FeatureLayout) -> np.ndarray:
    """Reshape standardized feature rows into ``(n, windows, step_dim)`` sequences.

    Step ``w`` holds the five statistics of window ``w`` followed by, for each
    wavelet band, the RMS of the band's coefficients whose nominal time
    position falls inside that window.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n = X.shape[0]
    nw = layout.n_windows
    stats = X[:, layout.n_wavelet:].reshape(n, nw, N_STATS)
    starts = np.arange(nw) * layout.stride
    band_feats = np.zeros((n, nw, len(layout.band_lengths)))
    off = 0
    for b, blen in enumerate(layout.band_lengths):
        coef = X[:, off:off + blen]
        pos = (np.arange(blen) + 0.5) * layout.series_length / blen
        for w, s in enumerate(starts):
            sel = (pos >= s) & (pos < s + layout.window)
            if sel.any():
                band_feats[:, w, b] = np.sqrt((coef[:, sel] ** 2).mean(axis=1))
        off += blen
    return np.concatenate([stats, band_feats], axis=2)


# -- persistence ----------------------------------------------------------

_MAGIC = b"QCTF"
_HEADER = struct.Struct("<4sIQQ")  # magic, version, rows, cols (excluding label)


def write_features_csv(path, X: np.ndarray, y: np.ndarray) -> None:
    X = np.asarray(X, dtype=np.float64)
    cols = [f"f{i}" for i in range(X.shape[1])] + ["label"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row, lab in zip(X, y):
            fh.write(",".join(repr(float(v)) for v in row) + f",{int(lab)}\n")


def read_features_csv(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, :-1], data[:, -1].astype(np.int64)


def write_features_bin(path, X: np.ndarray, y: np.ndarray) -> None:
    """Little-endian float64 rows ``[features..., label]`` after a fixed header."""
    X = np.asarray(X, dtype=np.float64)
    body = np.concatenate([X, np.asarray(y, dtype=np.float64)[:, None]], axis=1)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, 1, X.shape[0], X.shape[1]))
        fh.write(body.astype("<f8").tobytes())


def read_features_bin(path) -> tuple[np.ndarray, np.ndarray]:
    raw = Path(path).read_bytes()
    magic, version, rows, cols = _HEADER.unpack_from(raw)
    if magic != _MAGIC or version != 1:
        raise DataError(f"{path}: not a feature matrix file")
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size != rows * (cols + 1):
        raise DataError(f"{path}: truncated feature matrix")
    body = body.reshape(rows, cols + 1).astype(np.float64)
    return body[:, :-1], body[:, -1].astype(np.int64)
