import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from quchater.chaos import (
    ChaosConfig,
    henon_orbit,
    henon_step,
    iterate_perturb,
    logistic_step,
    perturb_hidden,
    perturb_hidden_backward,
)
from quchater.errors import ConfigError, DimensionTooSmall, OutOfDomain

from helpers import central_diff, rel_err


def test_logistic_examples():
    assert logistic_step([0.5], 2.0)[0] == 0.5
    for r in (0.5, 2.0, 3.99):
        np.testing.assert_array_equal(logistic_step([0.0, 1.0], r), [0.0, 0.0])
    assert abs(logistic_step([0.3], 3.8475)[0] - 3.8475 * 0.3 * 0.7) < 1e-15
    assert abs(logistic_step([0.3], 3.8475)[0] - 0.807975) < 1e-12
    with pytest.raises(OutOfDomain):
        logistic_step([1.2], 3.0)


def test_henon_examples():
    assert henon_step(0.0, 0.0) == (1.0, 0.0)
    x, y = henon_step(1.0, 0.0, ChaosConfig(a=1.4, b=0.3))
    assert abs(x + 0.4) < 1e-15 and abs(y - 0.3) < 1e-15


def test_config_validation():
    for r in (0.0, 4.0, -1.0):
        with pytest.raises(ConfigError):
            ChaosConfig(r=r)
    assert ChaosConfig.from_dict(ChaosConfig(r=3.1).to_dict()) == ChaosConfig(r=3.1)


def test_perturb_hand_composed():
    out = perturb_hidden(np.array([0.0, 0.0, 0.5]), ChaosConfig(r=2.0))
    np.testing.assert_allclose(out, [1.0, 0.0, -0.25], atol=1e-15)
    with pytest.raises(DimensionTooSmall):
        perturb_hidden(np.array([0.1]), ChaosConfig())


def test_perturb_backward_matches_finite_differences():
    cfg = ChaosConfig()
    rng = np.random.default_rng(0)
    for _ in range(20):
        h = rng.uniform(-0.9, 0.9, size=(3, 5))
        up = rng.normal(size=(3, 5))
        num = central_diff(lambda: float(np.sum(up * perturb_hidden(h, cfg))), h)
        assert rel_err(perturb_hidden_backward(h, up, cfg), num) < 1e-6


def test_henon_trapping_orbit():
    orbit = henon_orbit(0.0, 0.0, 100_000)
    assert np.all(np.isfinite(orbit))
    assert np.abs(orbit[:, 0]).max() <= 2.7 and np.abs(orbit[:, 1]).max() <= 0.45


def test_sensitivity_witness():
    cfg = ChaosConfig(r=3.9)
    rng = np.random.default_rng(5)
    h = rng.uniform(-0.8, 0.8, size=8)
    h2 = h.copy()
    h2[3] += 1e-8
    a, b = h.copy(), h2.copy()
    diverged = False
    for _ in range(200):
        a, b = iterate_perturb(a, cfg, 1), iterate_perturb(b, cfg, 1)
        if np.abs(a - b).max() > 1e-2:
            diverged = True
            break
    assert diverged


def test_pure_function():
    h = np.linspace(-0.9, 0.9, 6)
    assert perturb_hidden(h, ChaosConfig()).tobytes() == perturb_hidden(h, ChaosConfig()).tobytes()


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.integers(1, 16), elements=st.floats(0.0, 1.0)),
       st.floats(1e-6, 4.0, exclude_max=True))
def test_logistic_bounded(h, r):
    out = logistic_step(h, r)
    assert np.all(out >= 0.0) and np.all(out < 1.0)
