"""Multi-level discrete wavelet transform (Mallat pyramid).

Filters are the orthonormal Daubechies family. Two boundary policies are
supported: ``symmetric`` (half-sample reflection, redundant coefficients at
the edges) and ``periodization`` (circular, non-redundant, energy
preserving). Both reconstruct the input exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
import numpy.polynomial.polynomial as P

from ..errors import TooManyLevels


def daubechies_lowpass(n_vanishing: int) -> np.ndarray:
    """Minimum-phase Daubechies scaling filter with ``n_vanishing`` moments.

    Built by spectral factorisation of the half-band polynomial
    ``sum_k C(N-1+k, k) y^k`` with ``y = (2 - z - 1/z) / 4``, keeping the roots
    inside the unit circle. Normalised to sum to sqrt(2).
    """
    n = n_vanishing
    y_of_z = np.array([-0.25, 0.5, -0.25])
    q = np.zeros(1)
    for k in range(n):
        term = np.array([1.0])
        for _ in range(k):
            term = P.polymul(term, y_of_z)
        term = P.polymul(term, np.r_[np.zeros(n - 1 - k), 1.0])
        q = P.polyadd(q, comb(n - 1 + k, k) * term)
    roots = P.polyroots(q) if len(q) > 1 else np.array([])
    h = np.array([1.0])
    for _ in range(n):
        h = P.polymul(h, [0.5, 0.5])
    for z in roots[np.abs(roots) < 1.0]:
        h = P.polymul(h, [-z, 1.0])
    h = np.real(h)[::-1]
    return h / h.sum() * np.sqrt(2.0)


# Reconstruction low-pass filters; the other three follow from the QMF relations.
_REC_LO = {
    "haar": np.array([1.0, 1.0]) / np.sqrt(2.0),
    "db2": daubechies_lowpass(2),
    "db4": daubechies_lowpass(4),
}
FAMILIES = tuple(_REC_LO)
MODES = ("symmetric", "periodization")


@dataclass(frozen=True)
class FilterBank:
    dec_lo: np.ndarray
    dec_hi: np.ndarray
    rec_lo: np.ndarray
    rec_hi: np.ndarray

    @property
    def length(self) -> int:
        return len(self.dec_lo)


def filter_bank(family: str) -> FilterBank:
    try:
        rec_lo = _REC_LO[family]
    except KeyError:
        raise ValueError(f"unknown wavelet family {family!r}; choose from {FAMILIES}") from None
    n = len(rec_lo)
    sign = (-1.0) ** np.arange(n)
    rec_hi = sign * rec_lo[::-1]
    return FilterBank(dec_lo=rec_lo[::-1].copy(), dec_hi=rec_hi[::-1].copy(),
                      rec_lo=rec_lo.copy(), rec_hi=rec_hi)


@dataclass
class WaveletDecomposition:
    approximation: np.ndarray
    details: list  # details[0] is level 1 (finest), details[-1] is level L
    wavelet_family: str = "db4"
    levels: int = 1
    mode: str = "symmetric"
    lengths: list = field(default_factory=list)  # signal length entering each level

    def coefficients(self) -> list:
        """Coarse-to-fine list ``[a_L, d_L, ..., d_1]``."""
        return [self.approximation, *self.details[::-1]]

    def flatten(self) -> np.ndarray:
        return np.concatenate(self.coefficients())

    def band_lengths(self) -> list:
        return [len(c) for c in self.coefficients()]

    def energy(self) -> float:
        return float(sum(np.dot(c, c) for c in self.coefficients()))


def _sym_index(idx: np.ndarray, n: int) -> np.ndarray:
    # half-sample symmetric extension: ... x1 x0 | x0 x1 ... x_{n-1} | x_{n-1} x_{n-2} ...
    period = 2 * n
    k = np.mod(idx, period)
    return np.where(k < n, k, period - 1 - k)


def _analysis_step(x: np.ndarray, bank: FilterBank, mode: str):
    n = len(x)
    f = bank.length
    taps = np.arange(f)
    if mode == "periodization":
        if n % 2:
            x = np.append(x, x[-1])
            n += 1
        out = n // 2
        # centre the filter so that a_k covers x[2k .. 2k+f-1] shifted by f/2 - 1
        pos = 2 * np.arange(out)[:, None] + 1 - taps[None, :] + (f // 2 - 1)
        xs = x[np.mod(pos, n)]
    else:
        out = (n + f - 1) // 2
        pos = 2 * np.arange(out)[:, None] + 1 - taps[None, :]
        xs = x[_sym_index(pos, n)]
    return xs @ bank.dec_lo, xs @ bank.dec_hi


def _synthesis_step(a: np.ndarray, d: np.ndarray, bank: FilterBank, mode: str, n_out: int):
    f = bank.length
    m = len(a)
    if mode == "periodization":
        n = 2 * m
        y = np.zeros(n)
        shift = f // 2 - 1
        for j in range(f):
            # adjoint of the analysis gather: coefficient k feeds x[2k + 1 - j + shift]
            idx = np.mod(2 * np.arange(m) + 1 - j + shift, n)
            np.add.at(y, idx, a * bank.dec_lo[j] + d * bank.dec_hi[j])
        return y[:n_out]
    # upsample-and-convolve, keeping the central part of the full convolution
    up_a = np.zeros(2 * m)
    up_d = np.zeros(2 * m)
    up_a[1::2] = a
    up_d[1::2] = d
    full = np.convolve(up_a, bank.rec_lo) + np.convolve(up_d, bank.rec_hi)
    start = f - 1
    return full[start:start + n_out]


def dwt_decompose(series, family: str = "db4", levels: int = 3,
                  mode: str = "symmetric") -> WaveletDecomposition:
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("dwt_decompose expects a 1-D series")
    if levels < 1 or 2 ** levels > len(x):
        raise TooManyLevels(f"{levels} levels need at least {2 ** max(levels, 0)} samples, got {len(x)}")
    if mode not in MODES:
        raise ValueError(f"unknown boundary mode {mode!r}")
    bank = filter_bank(family)
    details, lengths = [], []
    a = x
    for _ in range(levels):
        lengths.append(len(a))
        a, d = _analysis_step(a, bank, mode)
        details.append(d)
    return WaveletDecomposition(a, details, family, levels, mode, lengths)


def dwt_reconstruct(dec: WaveletDecomposition) -> np.ndarray:
    bank = filter_bank(dec.wavelet_family)
    a = dec.approximation
    for level in range(dec.levels - 1, -1, -1):
        a = _synthesis_step(a, dec.details[level], bank, dec.mode, dec.lengths[level])
    return a
