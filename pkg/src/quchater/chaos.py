"""Logistic and Hénon maps and the chaotic perturbation of LSTM hidden states.

Hidden states live in (-1, 1) while the logistic map acts on [0, 1], so
:func:`perturb_hidden` squashes with ``(h + 1) / 2`` before the map and
unsquashes with ``2 z - 1`` after it. Dimensions 0 and 1 then take one Hénon
step.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError, DimensionTooSmall, OutOfDomain


@dataclass(frozen=True)
class ChaosConfig:
    r: float = 3.8475
    a: float = 1.4
    b: float = 0.3

    def __post_init__(self):
        if not 0.0 < self.r < 4.0:
            raise ConfigError(f"logistic parameter r={self.r} outside (0, 4)")
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise ConfigError("Hénon parameters must be finite")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ChaosConfig":
        return cls(**d)


def logistic_step(h, r: float) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if np.any(h < 0.0) or np.any(h > 1.0) or not np.all(np.isfinite(h)):
        raise OutOfDomain("logistic map input must lie in [0, 1]")
    return r * h * (1.0 - h)


def henon_step(x, y, cfg: ChaosConfig = ChaosConfig()):
    return 1.0 - cfg.a * x * x + y, cfg.b * x


def henon_orbit(x0: float, y0: float, n: int, cfg: ChaosConfig = ChaosConfig()) -> np.ndarray:
    """``n`` successive Hénon iterates as an ``(n, 2)`` array."""
    out = np.empty((n, 2))
    x, y = float(x0), float(y0)
    a, b = cfg.a, cfg.b
    for i in range(n):
        x, y = 1.0 - a * x * x + y, b * x
        out[i, 0] = x
        out[i, 1] = y
    return out


def perturb_hidden(h, cfg: ChaosConfig) -> np.ndarray:
    """Apply the logistic stage to every unit, then one Hénon step to units 0 and 1.

    Works on a single state ``(m,)`` or a batch ``(..., m)``.
    """
    h = np.asarray(h, dtype=np.float64)
    if h.shape[-1] < 2:
        raise DimensionTooSmall("hidden size must be at least 2 for the Hénon stage")
    z = 2.0 * logistic_step((h + 1.0) / 2.0, cfg.r) - 1.0
    x, y = z[..., 0].copy(), z[..., 1].copy()
    z[..., 0], z[..., 1] = henon_step(x, y, cfg)
    return z


def perturb_hidden_backward(h, grad_out, cfg: ChaosConfig) -> np.ndarray:
    """Gradient of :func:`perturb_hidden` with respect to ``h``."""
    h = np.asarray(h, dtype=np.float64)
    s = (h + 1.0) / 2.0
    z = 2.0 * cfg.r * s * (1.0 - s) - 1.0
    # d z / d h = r (1 - 2 s)
    dz_dh = cfg.r * (1.0 - 2.0 * s)
    g = np.array(grad_out, dtype=np.float64, copy=True)
    gx, gy = g[..., 0].copy(), g[..., 1].copy()
    # x' = 1 - a z0^2 + z1,  y' = b z0
    g[..., 0] = gx * (-2.0 * cfg.a * z[..., 0]) + gy * cfg.b
    g[..., 1] = gx
    return g * dz_dh


def renormalize(h) -> np.ndarray:
    """Clip back into the hidden-state range [-1, 1]."""
    return np.clip(h, -1.0, 1.0)


def iterate_perturb(h0, cfg: ChaosConfig, steps: int, record_henon: bool = False):
    """Repeated perturb-and-renormalize; optionally records every Hénon output pair.

    Returns the final state, and with ``record_henon`` also an ``(steps, 2)``
    array of the raw (pre-clip) values written to units 0 and 1.
    """
    h = renormalize(np.asarray(h0, dtype=np.float64))
    trace = np.empty((steps, 2)) if record_henon else None
    for t in range(steps):
        z = perturb_hidden(h, cfg)
        if trace is not None:
            trace[t] = z[..., :2].reshape(-1, 2)[0]
        h = renormalize(z)
    if record_henon:
        return h, trace
    return h
