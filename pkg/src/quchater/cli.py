"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numeric failure. Every command writes ``report.json`` to ``--out``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import MODEL_KINDS, Config, apply_overrides, load_config
from .errors import ConfigError, DataError, NumericError, QuchaterError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="JSON config file (defaults apply when omitted)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config field, e.g. train.epochs=10 (repeatable)")
    p.add_argument("--dry-run", action="store_true",
                   help="validate and print the effective config without computing")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="format of the result printed to stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="quchater", description="Chaotic-quantum time-series classification toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("ingest", parents=[common], help="load a dataset and summarise it")
    p.add_argument("--input", help="dataset file (default: bundled Earthquakes)")
    p.add_argument("--split", choices=("train", "test"), default="train")

    sub.add_parser("preprocess", parents=[common], help="featurize, balance and standardize")

    p = sub.add_parser("train", parents=[common], help="train one model and save it")
    p.add_argument("--model", choices=MODEL_KINDS, default="quchater")

    p = sub.add_parser("evaluate", parents=[common], help="score a saved model on the test set")
    p.add_argument("--checkpoint", help="checkpoint prefix (default: <out>/model)")

    p = sub.add_parser("tune-r", parents=[common], help="Bayesian optimisation of the logistic r")
    p.add_argument("--budget", type=int, help="number of objective evaluations")

    p = sub.add_parser("qubit-sweep", parents=[common], help="G metric across qubit counts")
    p.add_argument("--qubits", type=int, nargs="+", help="qubit counts (default from config)")

    sub.add_parser("benchmark", parents=[common], help="train and score every model")

    p = sub.add_parser("curves", parents=[common], help="draw loss_curves/*.csv as an SVG chart")
    p.add_argument("--curves-dir", help="directory of loss-curve CSVs (default: <out>/loss_curves)")
    return parser


def resolve_config(args) -> Config:
    cfg = load_config(args.config)
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    return apply_overrides(cfg, overrides) if overrides else cfg


def _emit(rows: list[dict], fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(rows, indent=2))
        return
    if not rows:
        return
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    sys.stdout.write(buf.getvalue())


def _write_report(out: Path, command: str, cfg: Config, result: dict) -> None:
    report = {"command": command, "seed": cfg.seed, "config_digest": cfg.digest(),
              "config": cfg.to_dict(), "result": result}
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


def _log(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


# -- commands -----------------------------------------------------------------

def cmd_ingest(args, cfg: Config, out: Path) -> dict:
    from .ingest import load_dataset, load_earthquakes

    if args.input:
        ds = load_dataset(args.input, cfg.data.format, args.split)
    else:
        path = cfg.data.train_path if args.split == "train" else cfg.data.test_path
        ds = load_dataset(path, cfg.data.format, args.split) if path else load_earthquakes(args.split)
    summary = ds.summary()
    _emit([{k: json.dumps(v) if isinstance(v, (dict, list)) else v for k, v in summary.items()}],
          args.format)
    return summary


def cmd_preprocess(args, cfg: Config, out: Path) -> dict:
    from .preprocess import write_features_csv
    from .preprocess.pipeline import prepare_from_config

    data, _ = prepare_from_config(cfg)
    rows = []
    for name in ("train", "val", "test"):
        split = getattr(data, name)
        write_features_csv(out / f"features_{name}.csv", split.flat, split.y)
        counts = np.bincount(split.y, minlength=2)
        rows.append({"split": name, "rows": len(split), "class0": int(counts[0]),
                     "class1": int(counts[1]), "steps": split.X.shape[1],
                     "step_dim": split.X.shape[2]})
    (out / "layout.json").write_text(json.dumps(data.layout.to_dict(), indent=2) + "\n")
    _emit(rows, args.format)
    return {"splits": rows, "layout": data.layout.to_dict(), "test_digest": data.test_digest}


def cmd_train(args, cfg: Config, out: Path) -> dict:
    from .experiment import evaluate, train_model
    from .models import model_spec, save_model
    from .preprocess.pipeline import prepare_from_config

    data, _ = prepare_from_config(cfg)
    spec = model_spec(args.model, cfg)
    model, hist = train_model(spec, data.train, data.val, cfg.train.epochs, cfg.seed,
                              cfg.train.batch_size)
    save_model(out / "model", model)
    curves = out / "loss_curves"
    curves.mkdir(exist_ok=True)
    hist.write_csv(curves / f"{args.model}.csv")
    train_acc = evaluate(model, data.train, cfg.train.threshold).accuracy
    rows = [{"epoch": i + 1, "train_loss": tl, "val_loss": hist.val_loss[i] if hist.val_loss else ""}
            for i, tl in enumerate(hist.train_loss)]
    _emit(rows, args.format)
    return {"model": args.model, "trainable_params": model.param_count(True),
            "train_loss": hist.train_loss, "val_loss": hist.val_loss, "train_acc": train_acc}


def cmd_evaluate(args, cfg: Config, out: Path) -> dict:
    from .experiment import evaluate
    from .models import load_model
    from .preprocess.pipeline import prepare_from_config

    prefix = Path(args.checkpoint) if args.checkpoint else out / "model"
    if not prefix.with_suffix(".json").exists():
        raise DataError(f"no checkpoint at {prefix}.json")
    model = load_model(prefix)
    data, _ = prepare_from_config(cfg)
    report = evaluate(model, data.test, cfg.train.threshold).to_dict()
    _emit([{"model": model.kind, **report}], args.format)
    return {"model": model.kind, "metrics": report}


def cmd_tune_r(args, cfg: Config, out: Path) -> dict:
    from .experiment import tune_r

    res = tune_r(cfg, args.budget, progress=lambda t: _log(f"r={t.r:.4f} loss={t.loss:.6f} {t.status}"))
    res.write_csv(out / "bo_history.csv")
    (out / "bo_history.json").write_text(res.to_json() + "\n")
    print(f"r* = {res.r_star!r} (validation loss {res.best_loss!r})")
    return {"r_star": res.r_star, "best_loss": res.best_loss, "trials": len(res.history)}


def cmd_qubit_sweep(args, cfg: Config, out: Path) -> dict:
    from dataclasses import asdict

    from .experiment import qubit_sweep

    res = qubit_sweep(cfg, args.qubits, progress=lambda r: _log(f"Q={r.qubits} G={r.G:.4f} {r.status}"))
    res.write_csv(out / "sweep.csv")
    _emit([asdict(r) for r in res.rows], args.format)
    return res.to_dict()


def cmd_benchmark(args, cfg: Config, out: Path) -> dict:
    from .experiment import benchmark_summary, comparison_table, run_full_benchmark

    res = run_full_benchmark(cfg, out, progress=lambda m: _log(f"{m.name}: {m.status} {m.message}"))
    _log(comparison_table(res))
    summary = benchmark_summary(res)
    if args.format == "json":
        print(json.dumps(summary["models"], indent=2))
    else:
        sys.stdout.write((out / "metrics.csv").read_text())
    return summary


def cmd_curves(args, cfg: Config, out: Path) -> dict:
    from .experiment import RunHistory, loss_curves_svg

    src = Path(args.curves_dir) if args.curves_dir else out / "loss_curves"
    files = sorted(src.glob("*.csv"))
    if not files:
        raise DataError(f"no loss-curve CSVs in {src}")
    hists = {}
    for f in files:
        with open(f, newline="") as fh:
            rows = list(csv.DictReader(fh))
        try:
            hists[f.stem] = RunHistory([float(r["train_loss"]) for r in rows])
        except (KeyError, ValueError) as exc:
            raise DataError(f"{f}: not a loss-curve CSV ({exc})") from exc
    (out / "curves.svg").write_text(loss_curves_svg(hists))
    _emit([{"model": k, "epochs": h.epochs} for k, h in hists.items()], args.format)
    return {"curves": list(hists), "svg": "curves.svg"}


COMMANDS = {
    "ingest": cmd_ingest,
    "preprocess": cmd_preprocess,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "tune-r": cmd_tune_r,
    "qubit-sweep": cmd_qubit_sweep,
    "benchmark": cmd_benchmark,
    "curves": cmd_curves,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        if args.dry_run:
            print(cfg.to_json())
            return EXIT_OK
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        result = COMMANDS[args.command](args, cfg, out)
        _write_report(out, args.command, cfg, result)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except QuchaterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
