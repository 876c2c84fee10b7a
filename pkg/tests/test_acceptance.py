"""Acceptance criteria, one printed PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v -s`` or directly as a script
(``python tests/test_acceptance.py``). The end-to-end and determinism
criteria train all seven models on the bundled Earthquakes data with the
default configuration and are marked ``slow``.
"""

from __future__ import annotations

import csv
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import central_diff, model_grad_errors, rel_err  # noqa: E402

RESULTS: list[str] = []


def report(name: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


# 1 ---------------------------------------------------------------------------

def test_g_metric_exactness():
    from quchater.experiment import generalization_G

    rows = [((0.8813, 0.8542), 0.827), ((0.9612, 0.8807), 0.800),
            ((0.9902, 0.9634), 0.937), ((0.9527, 0.9141), 0.876)]
    errs = [abs(generalization_G(*acc) - g) for acc, g in rows]
    report("G-metric exactness", max(errs) <= 5e-4,
           f"max |G - printed| = {max(errs):.7g} over 4 rows (tol 5e-4)")


# 2 ---------------------------------------------------------------------------

def test_gradient_oracle_suite():
    from quchater import neural as nn
    from quchater.chaos import ChaosConfig, perturb_hidden, perturb_hidden_backward
    from quchater.models import (
        CNN1DClassifier,
        GRUClassifier,
        LSTMClassifier,
        QLSTMClassifier,
        QuChaTeR,
        ReservoirClassifier,
        RNNClassifier,
    )
    from quchater.qsim import CircuitParams, embedding_forward, input_shift_grad, parameter_shift_grad

    t0 = time.perf_counter()
    worst: dict[str, float] = {}

    def note(key, err):
        worst[key] = max(worst.get(key, 0.0), err)

    for seed in range(20):
        rng = np.random.default_rng(seed)
        # parameter shift, Q <= 4, L <= 3
        q, layers = int(rng.integers(1, 5)), int(rng.integers(1, 4))
        params = CircuitParams.init(layers, q, rng)
        x, up = rng.uniform(-np.pi, np.pi, q), rng.normal(size=q)
        th = params.theta.copy()
        num = central_diff(lambda: float(up @ embedding_forward(x, CircuitParams(th))), th)
        # <Z> gradients can vanish identically (Q=1), so these use absolute error
        note("shift-theta", np.abs(parameter_shift_grad(x, params, up) - num).max())
        xx = x.copy()
        num = central_diff(lambda: float(up @ embedding_forward(xx, params)), xx)
        note("shift-x", np.abs(input_shift_grad(x, params, up) - num).max())

        # classical kernels
        store = nn.ParamStore()
        nn.init_lstm(store, "l", 3, 4, seed)
        nn.init_gru(store, "g", 3, 4, seed)
        nn.init_rnn(store, "r", 3, 4, seed)
        xi, h, c = rng.normal(size=(2, 3)), rng.normal(size=(2, 4)), rng.normal(size=(2, 4))
        w1, w2 = rng.normal(size=(2, 4)), rng.normal(size=(2, 4))
        p = nn.lstm_params(store, "l")
        f = lambda: float(np.sum(w1 * nn.lstm_cell_step(xi, h, c, p)[0])  # noqa: E731
                          + np.sum(w2 * nn.lstm_cell_step(xi, h, c, p)[1]))
        dx, dh, dc, g = nn.lstm_cell_backward(w1, w2, nn.lstm_cell_step(xi, h, c, p)[2], p)
        for k in g:
            note("lstm", rel_err(g[k], central_diff(f, p[k])))
        for name, arr in (("x", xi), ("h", h), ("c", c)):
            note("lstm", rel_err({"x": dx, "h": dh, "c": dc}[name], central_diff(f, arr)))
        p = nn.gru_params(store, "g")
        f = lambda: float(np.sum(w1 * nn.gru_cell_step(xi, h, p)[0]))  # noqa: E731
        dx, dh, g = nn.gru_cell_backward(w1, nn.gru_cell_step(xi, h, p)[1], p)
        for k in g:
            note("gru", rel_err(g[k], central_diff(f, p[k])))
        note("gru", rel_err(dh, central_diff(f, h)))
        p = nn.rnn_params(store, "r")
        f = lambda: float(np.sum(w1 * nn.rnn_cell_step(xi, h, p)[0]))  # noqa: E731
        dx, dh, g = nn.rnn_cell_backward(w1, nn.rnn_cell_step(xi, h, p)[1], p)
        for k in g:
            note("rnn", rel_err(g[k], central_diff(f, p[k])))
        note("rnn", rel_err(dx, central_diff(f, xi)))

        seq, W, b = rng.normal(size=(2, 7, 3)), rng.normal(size=(3, 4, 3)), rng.normal(size=4) * 0.1
        wt = rng.normal(size=(2, 7, 4))
        f = lambda: float(np.sum(wt * nn.tcn_layer(seq, W, b, 3, 2)[0]))  # noqa: E731
        dseq, dW, db = nn.tcn_layer_backward(wt, nn.tcn_layer(seq, W, b, 3, 2)[1])
        note("tcn", max(rel_err(dseq, central_diff(f, seq)), rel_err(dW, central_diff(f, W)),
                        rel_err(db, central_diff(f, b))))

        y = rng.integers(0, 2, 6).astype(float)
        pr = rng.uniform(0.05, 0.95, 6)
        note("bce", rel_err(nn.bce_loss(pr, y)[1], central_diff(lambda: nn.bce_loss(pr, y)[0], pr)))
        s = rng.normal(size=6) * 3
        note("bce", rel_err(nn.bce_with_logits(s, y)[1],
                            central_diff(lambda: nn.bce_with_logits(s, y)[0], s)))

        hh = rng.uniform(-0.9, 0.9, (3, 5))
        upc = rng.normal(size=(3, 5))
        num = central_diff(lambda: float(np.sum(upc * perturb_hidden(hh, ChaosConfig()))), hh)
        note("chaos", rel_err(perturb_hidden_backward(hh, upc, ChaosConfig()), num))

        # composite models; step 1e-5 balances roundoff against truncation
        F = 9
        models = {
            "quchater": QuChaTeR(F, hidden_size=5, tcn_channels=4, qubits=3, circuit_layers=2, seed=seed),
            "qlstm": QLSTMClassifier(F, hidden_size=5, qubits=3, seed=seed),
            "lstm-model": LSTMClassifier(F, hidden_size=5, seed=seed),
            "gru-model": GRUClassifier(F, hidden_size=5, seed=seed),
            "rnn-model": RNNClassifier(F, hidden_size=5, seed=seed),
            "cnn1d": CNN1DClassifier(F, channels=(3, 4), seed=seed),
            "reservoir": ReservoirClassifier(F, size=7, seed=seed),
        }
        X = rng.normal(size=(3, 3, F))
        for name, m in models.items():
            for k in m.params.trainable():
                if k.rsplit(".", 1)[-1].startswith("b"):
                    m.params.data[k][...] = rng.normal(scale=0.1, size=m.params[k].shape)
            note(name, max(model_grad_errors(m, X, np.array([0, 1, 1]), eps=1e-5).values()))

    elapsed = time.perf_counter() - t0
    bad = {k: v for k, v in worst.items() if v >= (1e-5 if k.startswith("shift") else 1e-4)}
    summary = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    report("Gradient oracle suite", not bad and elapsed < 60,
           f"20 seeds, worst error per kernel (shift rule abs, others rel): {summary}; {elapsed:.1f}s")


# 3 ---------------------------------------------------------------------------

def test_quantum_simulator_exactness():
    from quchater.qsim import CNOT, RY, RZ, CircuitParams, StateVector, apply_gate, run_embedding
    from quchater.qsim import ry_matrix, rz_matrix

    rng = np.random.default_rng(0)
    a = rng.normal(size=16) + 1j * rng.normal(size=16)
    s = StateVector(a / np.linalg.norm(a), 4)
    drift = 0.0
    for _ in range(10_000):
        k = rng.integers(3)
        if k == 0:
            g = RY(rng.uniform(-7, 7), int(rng.integers(4)))
        elif k == 1:
            g = RZ(rng.uniform(-7, 7), int(rng.integers(4)))
        else:
            c, t = rng.choice(4, 2, replace=False)
            g = CNOT(int(c), int(t))
        s = apply_gate(s, g)
        drift = max(drift, abs(s.norm() - 1.0))

    cx01 = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    cx10 = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex)
    U = cx10 @ cx01 @ np.kron(rz_matrix(0.0), rz_matrix(0.0)) @ np.kron(ry_matrix(np.pi / 2), ry_matrix(0))
    oracle = U @ np.array([1, 0, 0, 0], dtype=complex)
    got = run_embedding([0.0, 0.0], CircuitParams(np.array([[np.pi / 2, 0.0]]))).amplitudes
    err = np.abs(got - oracle).max()
    bell = apply_gate(apply_gate(StateVector.zero(2), RY(np.pi / 2, 0)), CNOT(0, 1)).amplitudes
    bell_err = np.abs(bell - np.array([1, 0, 0, 1]) / np.sqrt(2)).max()
    report("Quantum simulator exactness", drift < 1e-12 and err < 1e-12 and bell_err < 1e-12,
           f"norm drift {drift:.1e} over 1e4 gates; Q=2 case vs 4x4 oracle {err:.1e}; "
           f"CNOT(0,1) Bell pair {bell_err:.1e}")


# 4 ---------------------------------------------------------------------------

def test_chaos_boundedness():
    from quchater.chaos import ChaosConfig, iterate_perturb

    rng = np.random.default_rng(0)
    h, trace = iterate_perturb(rng.uniform(-1, 1, 32), ChaosConfig(r=3.8475), 100_000, record_henon=True)
    finite = bool(np.all(np.isfinite(trace)) and np.all(np.isfinite(h)))
    mx, my = np.abs(trace[:, 0]).max(), np.abs(trace[:, 1]).max()
    report("Chaos boundedness", finite and mx <= 2.7 and my <= 0.45,
           f"1e5 steps at r=3.8475: finite={finite}, max|x|={mx:.4f} (<=2.7), max|y|={my:.4f} (<=0.45)")


# 5 ---------------------------------------------------------------------------

def test_dwt_perfect_reconstruction():
    from quchater.preprocess.wavelets import FAMILIES, MODES, dwt_decompose, dwt_reconstruct

    rng = np.random.default_rng(0)
    worst = 0.0
    for family in FAMILIES:
        for mode in MODES:
            for _ in range(100):
                x = rng.normal(size=int(rng.integers(16, 1025)))
                rec = dwt_reconstruct(dwt_decompose(x, family, 3, mode))
                worst = max(worst, np.linalg.norm(rec - x) / np.linalg.norm(x))
    d = dwt_decompose(np.full(512, 2.5), "haar", 3)
    haar_det = max(np.abs(det).max() for det in d.details)
    report("DWT perfect reconstruction", worst < 1e-9 and haar_det < 1e-12,
           f"worst rel err {worst:.1e} over 100 signals per family and boundary mode; Haar constant max |detail| {haar_det:.1e}")


# 6 ---------------------------------------------------------------------------

def test_bo_sanity():
    from quchater.bayesopt import expected_improvement, optimize_r

    res = optimize_r(lambda r: (r - 2.0) ** 2, budget=15, seed=0)
    ei = expected_improvement(0.3, 1.0, 0.3)
    ei_err = abs(ei - 1 / math.sqrt(2 * math.pi))
    report("BO sanity", abs(res.r_star - 2.0) < 0.05 and ei_err < 1e-9,
           f"r* = {res.r_star:.4f} (|r*-2| < 0.05); EI(z=0) error {ei_err:.1e}")


# 7 + 9 -----------------------------------------------------------------------

_BENCH: dict = {}


def _bench_runs():
    """Run the default benchmark twice through the CLI; cached for both criteria."""
    if not _BENCH:
        from quchater import cli

        root = Path(tempfile.mkdtemp(prefix="quchater-accept-"))
        for tag in ("a", "b"):
            t0 = time.perf_counter()
            code = cli.main(["benchmark", "--out", str(root / tag), "--seed", "42"])
            _BENCH[tag] = (root / tag, code, time.perf_counter() - t0)
    return _BENCH


@pytest.mark.slow
def test_end_to_end_desk_scale():
    import json

    out, code, elapsed = _bench_runs()["a"]
    with open(out / "metrics.csv") as fh:
        rows = list(csv.DictReader(fh))
    summary = json.loads((out / "report.json").read_text())["result"]
    models, abl = summary["models"], summary["ablations"]
    valid = all(m["metrics_valid"] for m in models)
    decreased = all(m["loss_decreased"] for m in models)
    abl_ok = [a["status"] for a in abl] == ["ok", "ok"]
    leak_free = summary["leakage_free"]
    ok = leak_free and code == 0 and elapsed < 1800 and len(rows) == 7 and valid and decreased and abl_ok
    refs_shown = all(r["ref_accuracy"] for r in rows)
    for r in rows:
        RESULTS.append(f"    {r['model']:<14} accuracy {float(r['accuracy']):.4f} (published {r['ref_accuracy']}), "
                       f"roc_auc {float(r['roc_auc']):.4f} (published {r['ref_roc_auc']})")
    report("End-to-end desk-scale run", ok and refs_shown,
           f"exit {code}, {elapsed / 60:.1f} min (<30), {len(rows)} rows, metric identities {valid}, "
           f"final<epoch-1 loss for all {decreased}, ablations {[a['status'] for a in abl]}, "
           f"test set untouched {leak_free}")


# 8 ---------------------------------------------------------------------------

def test_smote_balance():
    from quchater.config import Config
    from quchater.ingest import load_earthquakes
    from quchater.preprocess import smote_oversample
    from quchater.preprocess.pipeline import feature_matrix

    ds = load_earthquakes("train")
    X = feature_matrix(ds, Config())
    Xo, yo = smote_oversample(X, ds.labels, 5, 42)
    counts = np.bincount(yo).tolist()
    pool = X[ds.labels == 1]
    a = pool[:, None, :]
    d = pool[None, :, :] - a
    dd = np.maximum((d ** 2).sum(-1), 1e-300)
    passed = 0
    for s in Xo[len(X):]:
        lam = ((s - a) * d).sum(-1) / dd
        resid = np.linalg.norm(a + lam[..., None] * d - s, axis=-1)
        passed += bool(np.any((lam >= -1e-9) & (lam <= 1 + 1e-9) & (resid <= 1e-9)))
    n_syn = len(Xo) - len(X)
    report("SMOTE balance", counts == [264, 264] and passed == n_syn,
           f"264/58 -> {counts[0]}/{counts[1]}; {passed}/{n_syn} synthetic points on a minority segment")


# 9 ---------------------------------------------------------------------------

@pytest.mark.slow
def test_determinism():
    runs = _bench_runs()
    (a, ca, _), (b, cb, _) = runs["a"], runs["b"]
    files = sorted(p.relative_to(a) for p in a.rglob("*.csv"))
    same = [f for f in files if (a / f).read_bytes() == (b / f).read_bytes()]
    report("Determinism", ca == cb == 0 and len(files) > 0 and len(same) == len(files),
           f"{len(same)}/{len(files)} CSV files byte-identical across two seed-42 benchmark runs")


if __name__ == "__main__":
    failures = 0
    for fn in [v for k, v in list(globals().items()) if k.startswith("test_")]:
        try:
            fn()
        except AssertionError:
            failures += 1
    print("\n".join(["", "summary:"] + RESULTS))
    sys.exit(1 if failures else 0)
