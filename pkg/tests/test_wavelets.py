import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from quchater.errors import TooManyLevels
from quchater.preprocess.wavelets import (
    FAMILIES,
    MODES,
    daubechies_lowpass,
    dwt_decompose,
    dwt_reconstruct,
    filter_bank,
)

# Published reconstruction low-pass coefficients (standard wavelet tables).
DB2 = [0.48296291314469025, 0.836516303737469, 0.22414386804185735, -0.12940952255092145]
DB4 = [0.23037781330885523, 0.7148465705525415, 0.6308807679295904, -0.02798376941698385,
       -0.18703481171888114, 0.030841381835986965, 0.032883011666982945, -0.010597401784997278]
SQ2 = np.sqrt(2.0)


def test_filters_match_published_tables():
    np.testing.assert_allclose(daubechies_lowpass(2), DB2, atol=1e-12)
    np.testing.assert_allclose(daubechies_lowpass(4), DB4, atol=1e-12)
    np.testing.assert_allclose(filter_bank("haar").rec_lo, [1 / SQ2, 1 / SQ2], atol=1e-15)


@pytest.mark.parametrize("family", FAMILIES)
def test_filter_orthonormality(family):
    h = filter_bank(family).rec_lo
    assert abs(h.sum() - SQ2) < 1e-12
    for shift in range(0, len(h), 2):
        dot = np.dot(h[shift:], h[:len(h) - shift])
        assert abs(dot - (1.0 if shift == 0 else 0.0)) < 1e-12


def test_haar_constant_and_alternating():
    d = dwt_decompose([1, 1, 1, 1], "haar", 1)
    np.testing.assert_allclose(d.approximation, [SQ2, SQ2], atol=1e-15)
    np.testing.assert_allclose(d.details[0], [0, 0], atol=1e-15)
    # oracle: explicit orthonormal 4x4 Haar analysis matrix
    H = np.array([[1, 1, 0, 0], [0, 0, 1, 1], [1, -1, 0, 0], [0, 0, 1, -1]]) / SQ2
    x = np.array([1.0, -1, 1, -1])
    y = H @ x
    d = dwt_decompose(x, "haar", 1)
    np.testing.assert_allclose(d.approximation, y[:2], atol=1e-15)
    np.testing.assert_allclose(np.abs(d.details[0]), np.abs(y[2:]), atol=1e-15)
    np.testing.assert_allclose(np.abs(d.details[0]), [SQ2, SQ2], atol=1e-15)


@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("n", [64, 77, 512])
def test_haar_constant_multilevel_zero_details(mode, n):
    d = dwt_decompose(np.full(n, 3.5), "haar", 3, mode)
    for det in d.details:
        np.testing.assert_allclose(det, 0.0, atol=1e-12)


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("mode", MODES)
def test_perfect_reconstruction_random(family, mode):
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(16, 600))
        x = rng.normal(size=n) * rng.uniform(0.1, 10)
        rec = dwt_reconstruct(dwt_decompose(x, family, 3, mode))
        assert np.linalg.norm(rec - x) / np.linalg.norm(x) < 1e-9


@pytest.mark.parametrize("family", FAMILIES)
def test_periodization_preserves_energy(family):
    rng = np.random.default_rng(3)
    for n in (64, 128, 512):
        x = rng.normal(size=n)
        d = dwt_decompose(x, family, 3, "periodization")
        assert abs(d.energy() - np.sum(x ** 2)) < 1e-9 * np.sum(x ** 2)


@pytest.mark.parametrize("family", FAMILIES)
def test_coefficient_counts(family):
    f = filter_bank(family).length
    for n in (64, 77, 512):
        sym = dwt_decompose(np.ones(n), family, 3, "symmetric")
        per = dwt_decompose(np.ones(n), family, 3, "periodization")
        m_sym = m_per = n
        for level in range(3):
            m_sym = (m_sym + f - 1) // 2
            m_per = (m_per + 1) // 2
            assert len(sym.details[level]) == m_sym
            assert len(per.details[level]) == m_per
        assert sym.band_lengths()[0] == m_sym and per.band_lengths()[0] == m_per


def test_too_many_levels():
    with pytest.raises(TooManyLevels):
        dwt_decompose(np.ones(7), "haar", 3)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(8, 200), elements=st.floats(-1e3, 1e3)),
       st.sampled_from(FAMILIES), st.sampled_from(MODES))
def test_reconstruction_property(x, family, mode):
    rec = dwt_reconstruct(dwt_decompose(x, family, 2, mode))
    assert np.allclose(rec, x, atol=1e-9 * max(1.0, np.abs(x).max()))
