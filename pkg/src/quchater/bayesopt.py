"""One-dimensional Gaussian-process Bayesian optimisation of the logistic parameter r."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .errors import NumericError, QuchaterError, SingularKernel

_JITTERS = (0.0, 1e-12, 1e-10, 1e-8, 1e-6)


@dataclass
class TrialRecord:
    r: float
    loss: float
    status: str = "ok"  # "ok" or "failed"
    message: str = ""


@dataclass
class GpModel:
    observations: list = field(default_factory=list)
    length_scale: float = 0.5
    signal_std: float = 1.0
    noise_std: float = 1e-4

    def kernel(self, a, b) -> np.ndarray:
        a = np.atleast_1d(np.asarray(a, dtype=np.float64))
        b = np.atleast_1d(np.asarray(b, dtype=np.float64))
        d = a[:, None] - b[None, :]
        return self.signal_std ** 2 * np.exp(-0.5 * (d / self.length_scale) ** 2)

    def data(self) -> tuple[np.ndarray, np.ndarray]:
        ok = [t for t in self.observations if t.status == "ok"]
        return np.array([t.r for t in ok]), np.array([t.loss for t in ok])


def _cholesky(K: np.ndarray) -> np.ndarray:
    scale = max(float(np.mean(np.diag(K))), 1e-300)
    for jitter in _JITTERS:
        try:
            return np.linalg.cholesky(K + jitter * scale * np.eye(len(K)))
        except np.linalg.LinAlgError:
            continue
    raise SingularKernel("kernel matrix not positive definite after jitter 1e-6")


def gp_posterior(model: GpModel, candidates):
    """Zero-mean GP posterior mean and standard deviation at ``candidates``."""
    r, y = model.data()
    if len(r) == 0:
        raise ValueError("posterior needs at least one observation")
    scalar = np.ndim(candidates) == 0
    xs = np.atleast_1d(np.asarray(candidates, dtype=np.float64))
    K = model.kernel(r, r) + model.noise_std ** 2 * np.eye(len(r))
    L = _cholesky(K)
    alpha = np.linalg.solve(L.T, np.linalg.solve(L, y))
    Ks = model.kernel(r, xs)
    mean = Ks.T @ alpha
    v = np.linalg.solve(L, Ks)
    var = model.signal_std ** 2 - np.sum(v * v, axis=0)
    std = np.sqrt(np.maximum(var, 0.0))
    if scalar:
        return float(mean[0]), float(std[0])
    return mean, std


def _norm_pdf(z):
    return np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)


def _norm_cdf(z):
    from math import erf

    return 0.5 * (1.0 + np.vectorize(erf)(np.asarray(z) / math.sqrt(2.0)))


def expected_improvement(mean, std, f_min):
    """Expected reduction below ``f_min`` (minimisation form)."""
    mean = np.asarray(mean, dtype=np.float64)
    std = np.asarray(std, dtype=np.float64)
    imp = f_min - mean
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(std > 0, imp / np.where(std > 0, std, 1.0), 0.0)
    ei = np.where(std > 0, imp * _norm_cdf(z) + std * _norm_pdf(z), np.maximum(imp, 0.0))
    ei = np.maximum(ei, 0.0)
    return float(ei) if ei.ndim == 0 else ei


def initial_design(n: int, low: float, high: float) -> np.ndarray:
    """``n`` evenly spaced cell midpoints in ``(low, high)``."""
    return low + (np.arange(n) + 0.5) * (high - low) / n


@dataclass
class BOResult:
    r_star: float
    best_loss: float
    history: list

    def rows(self) -> list[dict]:
        best = math.inf
        out = []
        for i, t in enumerate(self.history):
            if t.status == "ok":
                best = min(best, t.loss)
            out.append({"trial": i, "r": t.r, "loss": t.loss, "best_so_far": best, "status": t.status})
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["trial", "r", "loss", "best_so_far", "status"],
                               lineterminator="\n")
            w.writeheader()
            for row in self.rows():
                w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})

    def to_json(self) -> str:
        return json.dumps({"r_star": self.r_star, "best_loss": self.best_loss,
                           "history": [asdict(t) for t in self.history]}, indent=2)


def optimize_r(objective: Callable[[float], float], budget: int = 15, seed: int = 0,
               n_initial: int = 5, grid_size: int = 400, low: float = 0.05, high: float = 3.95,
               length_scale: float = 0.5, signal_std: float = 1.0, noise_std: float = 1e-4,
               callback: Callable[[TrialRecord], None] | None = None) -> BOResult:
    """Minimise ``objective`` over r with an EI-driven GP search.

    Objective exceptions from this package, and non-finite losses, are
    recorded as failed trials and the search continues. Losses are centred
    on their running mean before fitting the zero-mean GP. The seed breaks
    ties between equal-EI grid points.
    """
    if budget < n_initial:
        raise ValueError("budget must cover the initial design")
    rng = np.random.default_rng(seed)
    gp = GpModel([], length_scale, signal_std, noise_std)
    grid = np.linspace(low, high, grid_size)

    def evaluate(r: float) -> None:
        try:
            loss = float(objective(float(r)))
            rec = TrialRecord(float(r), loss) if math.isfinite(loss) else \
                TrialRecord(float(r), math.nan, "failed", "non-finite loss")
        except QuchaterError as exc:
            rec = TrialRecord(float(r), math.nan, "failed", str(exc))
        gp.observations.append(rec)
        if callback is not None:
            callback(rec)

    for r in initial_design(n_initial, low, high):
        evaluate(r)
    for _ in range(budget - n_initial):
        rs, ys = gp.data()
        if len(rs) == 0:
            evaluate(rng.uniform(low, high))
            continue
        offset = ys.mean()
        centred = GpModel([TrialRecord(a, b - offset) for a, b in zip(rs, ys)],
                          length_scale, signal_std, noise_std)
        mean, std = gp_posterior(centred, grid)
        ei = expected_improvement(mean, std, float(ys.min() - offset))
        best = np.flatnonzero(ei >= ei.max() - 1e-15)
        evaluate(grid[best[rng.integers(len(best))]] if len(best) > 1 else grid[best[0]])

    rs, ys = gp.data()
    if len(rs) == 0:
        raise NumericError("every Bayesian-optimisation trial failed")
    i = int(np.argmin(ys))
    return BOResult(float(rs[i]), float(ys[i]), list(gp.observations))
