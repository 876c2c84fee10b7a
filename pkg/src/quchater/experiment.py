"""Training loop, metrics, the G stability score, the qubit sweep and the full benchmark."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .bayesopt import BOResult, optimize_r
from .config import Config
from .errors import NonFiniteLoss, QuchaterError, SingleClassTestSet
from .models import DISPLAY_NAMES, ModelSpec, SequenceClassifier, build_model, model_spec
from .neural import AdamState, adam_update, bce_with_logits
from .preprocess.pipeline import PreparedData, Split, dataset_digest, prepare_from_config

METRIC_NAMES = ("accuracy", "recall", "precision", "f1", "roc_auc")


def reference_values() -> dict:
    """Published figures bundled with the package (display only)."""
    return json.loads(resources.files("quchater").joinpath("reference_values.json").read_text())


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


# -- training ----------------------------------------------------------------

@dataclass
class RunHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    spec: dict = field(default_factory=dict)
    seed: int = 0
    wall_time: float = 0.0

    @property
    def epochs(self) -> int:
        return len(self.train_loss)

    def write_csv(self, path) -> None:
        rows = [(i + 1, tl, self.val_loss[i] if i < len(self.val_loss) else None)
                for i, tl in enumerate(self.train_loss)]
        _write_csv(path, ["epoch", "train_loss", "val_loss"], rows)


def mean_loss(model: SequenceClassifier, split: Split, batch_size: int = 256) -> float:
    total = 0.0
    for i in range(0, len(split), batch_size):
        logits = model.predict_logits(split.X[i:i + batch_size])
        loss, _ = bce_with_logits(logits, split.y[i:i + batch_size].astype(np.float64))
        total += loss * len(logits)
    return total / len(split)


def train_model(spec: ModelSpec, train: Split, val: Split | None = None, epochs: int = 50,
                seed: int = 0, batch_size: int = 32) -> tuple[SequenceClassifier, RunHistory]:
    """Fit a model with Adam on mini-batches drawn in a seeded order.

    The per-epoch training loss is the sample-weighted mean of the batch
    losses seen during that epoch. ``batch_size=0`` uses the full set.
    """
    model = build_model(spec, train.X.shape[2], seed)
    hist = RunHistory(spec=model.spec().to_dict(), seed=seed)
    start = time.perf_counter()
    state = AdamState(lr=model.lr)
    rng = np.random.default_rng([seed, 0x5EED])
    n = len(train)
    bs = n if batch_size <= 0 else min(batch_size, n)
    y_all = train.y.astype(np.float64)
    for epoch in range(1, epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for i in range(0, n, bs):
            idx = order[i:i + bs]
            logits, cache = model.forward(train.X[idx])
            loss, dlogits = bce_with_logits(logits, y_all[idx])
            if not math.isfinite(loss) or not np.all(np.isfinite(dlogits)):
                raise NonFiniteLoss(epoch)
            grads = model.backward(cache, dlogits)
            adam_update(model.params.data, grads, state)
            total += loss * len(idx)
        hist.train_loss.append(total / n)
        if val is not None and len(val):
            vl = mean_loss(model, val)
            if not math.isfinite(vl):
                raise NonFiniteLoss(epoch, f"non-finite validation loss at epoch {epoch}")
            hist.val_loss.append(vl)
    hist.wall_time = time.perf_counter() - start
    return model, hist


# -- metrics -----------------------------------------------------------------

def _average_ranks(x: np.ndarray) -> np.ndarray:
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ranks = np.empty(len(x))
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and xs[j + 1] == xs[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def roc_auc(scores, labels) -> float:
    """Mann-Whitney estimate of ROC-AUC with tied scores counted as half.

    Raises SingleClassTestSet when only one class is present.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassTestSet("ROC-AUC is undefined with a single class")
    ranks = _average_ranks(s)
    return float((ranks[y].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


@dataclass
class MetricsReport:
    accuracy: float
    recall: float
    precision: float
    f1: float
    roc_auc: float | None  # None when the test set has a single class
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> dict:
        return asdict(self)

    def identities_hold(self, tol: float = 1e-12) -> bool:
        """Check the count identities behind every reported ratio."""
        tp, fp, tn, fn = self.tp, self.fp, self.tn, self.fn
        ok = self.n > 0 and min(tp, fp, tn, fn) >= 0
        ok &= abs(self.accuracy - (tp + tn) / self.n) <= tol
        if tp + fp > 0:
            ok &= abs(self.precision - tp / (tp + fp)) <= tol
        if tp + fn > 0:
            ok &= abs(self.recall - tp / (tp + fn)) <= tol
        pr = self.precision + self.recall
        f1 = 0.0 if pr == 0 else 2 * self.precision * self.recall / pr
        ok &= abs(self.f1 - f1) <= tol
        vals = [self.accuracy, self.recall, self.precision, self.f1]
        if self.roc_auc is not None:
            vals.append(self.roc_auc)
        return bool(ok and all(0.0 <= v <= 1.0 for v in vals))


def metrics_from_scores(scores, labels, threshold: float = 0.5) -> MetricsReport:
    """Threshold probabilities (ties go to class 1) and summarise."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    pred = s >= threshold
    tp = int(np.sum(pred & y))
    fp = int(np.sum(pred & ~y))
    tn = int(np.sum(~pred & ~y))
    fn = int(np.sum(~pred & y))
    n = tp + fp + tn + fn
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    try:
        auc = roc_auc(s, y)
    except SingleClassTestSet:
        auc = None
    return MetricsReport((tp + tn) / n, recall, precision, f1, auc, tp, fp, tn, fn)


def evaluate(model: SequenceClassifier, data: Split, threshold: float = 0.5) -> MetricsReport:
    return metrics_from_scores(model.predict_proba(data.X), data.y, threshold)


def generalization_G(train_acc: float, test_acc: float) -> float:
    """Test accuracy penalised by the train-test gap."""
    return test_acc - abs(train_acc - test_acc)


# -- qubit sweep -------------------------------------------------------------

@dataclass
class SweepRow:
    qubits: int
    train_acc: float = math.nan
    test_acc: float = math.nan
    gap: float = math.nan
    G: float = math.nan
    status: str = "ok"
    message: str = ""


@dataclass
class SweepResult:
    rows: list
    best: SweepRow | None

    def write_csv(self, path) -> None:
        _write_csv(path, ["qubits", "train_acc", "test_acc", "gap", "G", "status", "recommended"],
                   [(r.qubits, r.train_acc, r.test_acc, r.gap, r.G, r.status,
                     int(self.best is not None and r.qubits == self.best.qubits)) for r in self.rows])

    def to_dict(self) -> dict:
        return {"rows": [asdict(r) for r in self.rows],
                "recommended_qubits": None if self.best is None else self.best.qubits}


def qubit_sweep(cfg: Config, qubits=None, data: PreparedData | None = None,
                progress=None) -> SweepResult:
    """Train one QuChaTeR per qubit count on identical data and seed."""
    if data is None:
        data, _ = prepare_from_config(cfg)
    rows = []
    for q in (cfg.sweep.qubits if qubits is None else qubits):
        row = SweepRow(int(q))
        try:
            spec = model_spec("quchater", cfg, qubits=int(q))
            model, _ = train_model(spec, data.train, data.val, cfg.train.epochs, cfg.seed,
                                   cfg.train.batch_size)
            row.train_acc = evaluate(model, data.train, cfg.train.threshold).accuracy
            row.test_acc = evaluate(model, data.test, cfg.train.threshold).accuracy
            row.gap = abs(row.train_acc - row.test_acc)
            row.G = generalization_G(row.train_acc, row.test_acc)
        except QuchaterError as exc:
            row.status, row.message = "failed", str(exc)
        rows.append(row)
        if progress:
            progress(row)
    ok = [r for r in rows if r.status == "ok"]
    best = max(ok, key=lambda r: r.G) if ok else None
    return SweepResult(rows, best)


# -- r tuning ----------------------------------------------------------------

def tune_r(cfg: Config, budget: int | None = None, data: PreparedData | None = None,
           progress=None) -> BOResult:
    """Bayesian optimisation of r against QuChaTeR's final validation loss."""
    if data is None:
        data, _ = prepare_from_config(cfg)
    bo = cfg.bayesopt

    def objective(r: float) -> float:
        spec = model_spec("quchater", cfg)
        spec.hyperparams["chaos"] = {**spec.hyperparams["chaos"], "r": r}
        model, _ = train_model(spec, data.train, None, bo.objective_epochs, cfg.seed,
                               cfg.train.batch_size)
        return mean_loss(model, data.val)

    return optimize_r(objective, bo.budget if budget is None else budget, cfg.seed,
                      bo.initial_design, bo.grid_size, bo.low, bo.high, bo.length_scale,
                      bo.signal_std, bo.noise_std, progress)


# -- benchmark ---------------------------------------------------------------

@dataclass
class ModelResult:
    name: str
    kind: str
    slug: str = ""  # file stem for the loss curve
    metrics: MetricsReport | None = None
    train_acc: float = math.nan
    history: RunHistory | None = None
    params: int = 0
    status: str = "ok"
    message: str = ""

    @property
    def loss_decreased(self) -> bool:
        h = self.history
        return bool(h and h.epochs >= 2 and h.train_loss[-1] < h.train_loss[0])


@dataclass
class BenchmarkResult:
    models: list
    ablations: list
    test_digest_before: str
    test_digest_after: str
    config_digest: str
    seed: int

    @property
    def leakage_free(self) -> bool:
        return self.test_digest_before == self.test_digest_after

    def sorted_models(self) -> list:
        key = lambda m: -(m.metrics.accuracy if m.metrics else -1.0)  # noqa: E731
        return sorted(self.models, key=key)


def _run_one(name: str, slug: str, spec: ModelSpec, data: PreparedData,
             cfg: Config) -> ModelResult:
    res = ModelResult(name, spec.kind, slug)
    try:
        model, hist = train_model(spec, data.train, data.val, cfg.train.epochs, cfg.seed,
                                  cfg.train.batch_size)
        res.history = hist
        res.params = model.param_count(trainable_only=True)
        res.metrics = evaluate(model, data.test, cfg.train.threshold)
        res.train_acc = evaluate(model, data.train, cfg.train.threshold).accuracy
    except QuchaterError as exc:
        res.status, res.message = "failed", str(exc)
    return res


_METRIC_HEADER = ["model", "kind", "status", *METRIC_NAMES, "tp", "fp", "tn", "fn", "train_acc",
                  "first_train_loss", "final_train_loss", "trainable_params"]


def _metric_row(m: ModelResult) -> list:
    r = m.metrics
    vals = [getattr(r, k) for k in METRIC_NAMES] if r else [None] * 5
    counts = [r.tp, r.fp, r.tn, r.fn] if r else [None] * 4
    h = m.history
    losses = [h.train_loss[0], h.train_loss[-1]] if h and h.train_loss else [None, None]
    return [m.name, m.kind, m.status, *vals, *counts, m.train_acc, *losses, m.params]


def write_metrics_csv(path, models, refs: dict | None = None) -> None:
    refs = refs or {}
    header = _METRIC_HEADER + [f"ref_{k}" for k in METRIC_NAMES]
    rows = []
    for m in models:
        ref = refs.get(m.kind, {}) if m.name == DISPLAY_NAMES.get(m.kind) else {}
        rows.append(_metric_row(m) + [ref.get(k) for k in METRIC_NAMES])
    _write_csv(path, header, rows)


def loss_curves_svg(histories: dict, width: int = 640, height: int = 400) -> str:
    """Minimal SVG line chart of per-epoch training loss."""
    curves = {k: h.train_loss for k, h in histories.items() if h and h.train_loss}
    pad = 50
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             '<rect width="100%" height="100%" fill="white"/>']
    if curves:
        n = max(len(v) for v in curves.values())
        lo = min(min(v) for v in curves.values())
        hi = max(max(v) for v in curves.values())
        span = hi - lo or 1.0
        colors = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
                  "#7f7f7f", "#bcbd22", "#17becf"]

        def xy(i, v):
            x = pad + (width - 2 * pad) * (i / max(n - 1, 1))
            y = height - pad - (height - 2 * pad) * (v - lo) / span
            return f"{x:.2f},{y:.2f}"

        lines.append(f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" '
                     'stroke="black"/>')
        lines.append(f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>')
        lines.append(f'<text x="{width / 2:.0f}" y="{height - 15}" font-size="12" '
                     'text-anchor="middle">epoch</text>')
        lines.append(f'<text x="5" y="{pad - 10}" font-size="12">loss {lo:.3f} to {hi:.3f}</text>')
        for j, (name, vals) in enumerate(curves.items()):
            col = colors[j % len(colors)]
            pts = " ".join(xy(i, v) for i, v in enumerate(vals))
            lines.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.5" points="{pts}"/>')
            lines.append(f'<text x="{width - pad + 5}" y="{pad + 14 * j}" font-size="10" '
                         f'fill="{col}">{name}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def run_full_benchmark(cfg: Config, out_dir=None, progress=None) -> BenchmarkResult:
    """Train and score every configured model, plus QuChaTeR ablations.

    Writes ``metrics.csv`` (sorted by accuracy, with the published figures
    alongside), ``loss_curves/<model>.csv``, ``ablation.csv`` and, when
    enabled, ``curves.svg`` to ``out_dir``.
    """
    data, test_ds = prepare_from_config(cfg)
    before = data.test_digest
    runs = [(DISPLAY_NAMES[k], k, model_spec(k, cfg)) for k in cfg.benchmark.models]
    abl = []
    if cfg.benchmark.ablations:
        abl = [("QuChaTeR (chaos off)", "quchater_chaos_off",
                model_spec("quchater", cfg, use_chaos=False)),
               ("QuChaTeR (quantum off)", "quchater_quantum_off",
                model_spec("quchater", cfg, use_quantum=False))]
    results, ablations = [], []
    for i, (name, slug, spec) in enumerate(runs + abl):
        res = _run_one(name, slug, spec, data, cfg)
        (results if i < len(runs) else ablations).append(res)
        if progress:
            progress(res)
    result = BenchmarkResult(results, ablations, before, dataset_digest(test_ds),
                             cfg.digest(), cfg.seed)
    if not result.leakage_free:
        raise QuchaterError("test set changed during the benchmark")
    if out_dir is not None:
        write_benchmark(result, out_dir, svg=cfg.benchmark.svg)
    return result


def write_benchmark(result: BenchmarkResult, out_dir, svg: bool = True) -> None:
    out = Path(out_dir)
    curves = out / "loss_curves"
    curves.mkdir(parents=True, exist_ok=True)
    refs = reference_values()["models"]
    write_metrics_csv(out / "metrics.csv", result.sorted_models(), refs)
    if result.ablations:
        full = [m for m in result.models if m.kind == "quchater"
                and m.name == DISPLAY_NAMES["quchater"]]
        write_metrics_csv(out / "ablation.csv", full + result.ablations)
    for m in result.models + result.ablations:
        if m.history is not None:
            m.history.write_csv(curves / f"{m.slug}.csv")
    if svg:
        (out / "curves.svg").write_text(loss_curves_svg({m.name: m.history for m in result.models}))


def benchmark_summary(result: BenchmarkResult) -> dict:
    def one(m: ModelResult) -> dict:
        return {"name": m.name, "kind": m.kind, "status": m.status, "message": m.message,
                "metrics": m.metrics.to_dict() if m.metrics else None, "train_acc": m.train_acc,
                "trainable_params": m.params,
                "metrics_valid": bool(m.metrics and m.metrics.identities_hold()),
                "loss_decreased": m.loss_decreased,
                "train_loss": m.history.train_loss if m.history else [],
                "val_loss": m.history.val_loss if m.history else []}

    return {"seed": result.seed, "config_digest": result.config_digest,
            "test_digest": result.test_digest_before, "leakage_free": result.leakage_free,
            "models": [one(m) for m in result.sorted_models()],
            "ablations": [one(m) for m in result.ablations],
            "reference": reference_values()["models"]}


def comparison_table(result: BenchmarkResult) -> str:
    """Plain-text table of measured metrics next to the published ones."""
    refs = reference_values()["models"]
    lines = [f"{'model':<24}" + "".join(f"{k:>20}" for k in METRIC_NAMES)]
    for m in result.sorted_models():
        ref = refs.get(m.kind, {})
        cells = []
        for k in METRIC_NAMES:
            v = getattr(m.metrics, k) if m.metrics else None
            mine = "n/a" if v is None else f"{v:.4f}"
            cells.append(f"{mine + ' (' + format(ref.get(k, math.nan), '.4f') + ')':>20}")
        lines.append(f"{m.name:<24}" + "".join(cells))
    return "\n".join(lines)


__all__ = [
    "BenchmarkResult",
    "MetricsReport",
    "ModelResult",
    "RunHistory",
    "SweepResult",
    "SweepRow",
    "benchmark_summary",
    "comparison_table",
    "evaluate",
    "generalization_G",
    "loss_curves_svg",
    "mean_loss",
    "metrics_from_scores",
    "qubit_sweep",
    "reference_values",
    "roc_auc",
    "run_full_benchmark",
    "train_model",
    "tune_r",
    "write_benchmark",
    "write_metrics_csv",
]
