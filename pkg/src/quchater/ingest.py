"""UCR/UEA ``.ts`` and CSV loaders plus deterministic train/validation split."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptySplit, MalformedHeader, RaggedSeries, UnknownLabel

SPLIT_TAGS = ("train", "validation", "test")

# Directives allowed before @data, lower-cased. Each may appear at most once.
_DIRECTIVES = {
    "problemname",
    "timestamps",
    "missing",
    "univariate",
    "dimensions",
    "equallength",
    "serieslength",
    "classlabel",
    "targetlabel",
    "data",
}
_MISSING_TOKENS = {"?", "nan", "NaN", "NAN"}


@dataclass(frozen=True)
class TimeSeriesDataset:
    """Labelled, equal-length univariate series.

    Missing readings are stored as ``NaN`` and left for the imputation stage.
    """

    sequences: np.ndarray  # (n, length) float64
    labels: np.ndarray  # (n,) int64 in {0, 1}
    split_tag: str = "train"
    name: str = ""
    class_labels: tuple = ("0", "1")

    def __post_init__(self):
        seq = np.asarray(self.sequences, dtype=np.float64)
        lab = np.asarray(self.labels, dtype=np.int64)
        if seq.ndim != 2:
            raise RaggedSeries("sequences must form a 2-D array")
        if seq.shape[0] != lab.shape[0]:
            raise RaggedSeries(
                f"{seq.shape[0]} sequences but {lab.shape[0]} labels")
        if lab.size and not np.isin(lab, (0, 1)).all():
            raise UnknownLabel("labels must be 0 or 1")
        if self.split_tag not in SPLIT_TAGS:
            raise ValueError(f"unknown split tag {self.split_tag!r}")
        object.__setattr__(self, "sequences", seq)
        object.__setattr__(self, "labels", lab)

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def length(self) -> int:
        return int(self.sequences.shape[1])

    def class_counts(self) -> dict[int, int]:
        return {c: int((self.labels == c).sum()) for c in (0, 1)}

    def subset(self, idx: Sequence[int], split_tag: str | None = None) -> "TimeSeriesDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return replace(self, sequences=self.sequences[idx], labels=self.labels[idx],
                       split_tag=split_tag or self.split_tag)

    def summary(self) -> dict:
        counts = self.class_counts()
        return {
            "name": self.name,
            "split": self.split_tag,
            "n_samples": len(self),
            "length": self.length,
            "class_counts": {str(k): v for k, v in counts.items()},
            "missing_values": int(np.isnan(self.sequences).sum()),
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def _parse_bool(tok: str, line_no: int) -> bool:
    t = tok.lower()
    if t not in ("true", "false"):
        raise MalformedHeader(f"line {line_no}: expected true/false, got {tok!r}")
    return t == "true"


def _parse_value(tok: str) -> float:
    tok = tok.strip()
    if tok in _MISSING_TOKENS:
        return math.nan
    return float(tok)


def parse_ucr_ts_text(text: str, split_tag: str = "train") -> TimeSeriesDataset:
    """Parse the contents of a univariate ``.ts`` file.

    Header directives must precede ``@data``; a directive seen twice, an
    unknown directive, a directive after ``@data`` or a missing ``@data``
    raises :class:`MalformedHeader`.
    """
    seen: set[str] = set()
    name = ""
    class_set: list[str] | None = None
    declared_length = None
    in_data = False
    rows: list[list[float]] = []
    raw_labels: list[str] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("@"):
            if in_data:
                raise MalformedHeader(f"line {line_no}: directive after @data")
            parts = line[1:].split()
            key = parts[0].lower()
            if key not in _DIRECTIVES:
                raise MalformedHeader(f"line {line_no}: unknown directive @{parts[0]}")
            if key in seen:
                raise MalformedHeader(f"line {line_no}: duplicate directive @{parts[0]}")
            seen.add(key)
            args = parts[1:]
            if key == "problemname":
                name = " ".join(args)
            elif key == "univariate":
                if not args or not _parse_bool(args[0], line_no):
                    raise MalformedHeader("only univariate series are supported")
            elif key == "serieslength":
                declared_length = int(args[0])
            elif key == "classlabel":
                if not args:
                    raise MalformedHeader(f"line {line_no}: @classLabel needs a value")
                if _parse_bool(args[0], line_no):
                    class_set = args[1:]
                    if not class_set:
                        raise MalformedHeader(f"line {line_no}: empty class list")
            elif key == "data":
                if "classlabel" not in seen:
                    raise MalformedHeader(f"line {line_no}: @data before @classLabel")
                in_data = True
            continue

        if not in_data:
            raise MalformedHeader(f"line {line_no}: series data before @data")
        if ":" not in line:
            raise UnknownLabel(f"line {line_no}: missing class label")
        body, label = line.rsplit(":", 1)
        if ":" in body:
            raise MalformedHeader(f"line {line_no}: multivariate rows are not supported")
        label = label.strip()
        if class_set is not None and label not in class_set:
            raise UnknownLabel(f"line {line_no}: label {label!r} not in {class_set}")
        rows.append([_parse_value(t) for t in body.split(",")])
        raw_labels.append(label)

    if not in_data:
        raise MalformedHeader("no @data section")
    return _assemble(rows, raw_labels, class_set, declared_length, split_tag, name)


def _assemble(rows, raw_labels, class_set, declared_length, split_tag, name):
    if not rows:
        return TimeSeriesDataset(np.zeros((0, declared_length or 0)), np.zeros(0, np.int64),
                                 split_tag, name)
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise RaggedSeries(f"series lengths differ: {sorted(lengths)}")
    if declared_length is not None and lengths != {declared_length}:
        raise RaggedSeries(f"declared length {declared_length}, found {lengths.pop()}")
    classes = list(class_set) if class_set is not None else sorted(set(raw_labels))
    if len(classes) > 2:
        raise UnknownLabel(f"binary task expected, got classes {classes}")
    mapping = _label_mapping(classes)
    labels = np.array([mapping[lab] for lab in raw_labels], dtype=np.int64)
    return TimeSeriesDataset(np.array(rows, dtype=np.float64), labels, split_tag, name,
                             tuple(classes))


def _label_mapping(classes: list[str]) -> dict[str, int]:
    if set(classes) <= {"0", "1"}:
        return {c: int(c) for c in classes}
    # arbitrary tags: the first declared class is the negative one
    return {c: i for i, c in enumerate(classes)}


def parse_ucr_ts(path: str | Path, split_tag: str = "train") -> TimeSeriesDataset:
    return parse_ucr_ts_text(Path(path).read_text(), split_tag)


def parse_csv(path: str | Path, split_tag: str = "train") -> TimeSeriesDataset:
    """One row per series, label in the last column. A header row is skipped."""
    rows, labels = [], []
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        toks = line.split(",")
        try:
            vals = [_parse_value(t) for t in toks[:-1]]
        except ValueError:
            if line_no == 1:
                continue
            raise
        rows.append(vals)
        labels.append(toks[-1].strip())
    return _assemble(rows, labels, None, None, split_tag, Path(path).stem)


def load_dataset(path: str | Path, fmt: str = "ts", split_tag: str = "train") -> TimeSeriesDataset:
    if fmt == "ts":
        return parse_ucr_ts(path, split_tag)
    if fmt == "csv":
        return parse_csv(path, split_tag)
    raise ValueError(f"unknown dataset format {fmt!r}")


def bundled_path(split: str) -> Path:
    """Path of the bundled Earthquakes ``TRAIN`` or ``TEST`` file."""
    return Path(str(resources.files("quchater") / "datasets" / f"Earthquakes_{split.upper()}.ts"))


def load_earthquakes(split: str = "train") -> TimeSeriesDataset:
    tag = "test" if split.lower() == "test" else "train"
    return parse_ucr_ts(bundled_path("TEST" if tag == "test" else "TRAIN"), tag)


def _format_value(v: float) -> str:
    return "?" if math.isnan(v) else repr(float(v))


def to_ts_text(ds: TimeSeriesDataset) -> str:
    lines = [
        f"@problemName {ds.name or 'unnamed'}",
        "@timeStamps false",
        f"@missing {str(bool(np.isnan(ds.sequences).any())).lower()}",
        "@univariate true",
        "@equalLength true",
        f"@seriesLength {ds.length}",
        "@classLabel true 0 1",
        "@data",
    ]
    for seq, lab in zip(ds.sequences, ds.labels):
        lines.append(",".join(_format_value(v) for v in seq) + f":{int(lab)}")
    return "\n".join(lines) + "\n"


def write_ts(ds: TimeSeriesDataset, path: str | Path) -> None:
    Path(path).write_text(to_ts_text(ds))


def _largest_remainder(counts: Iterable[int], fraction: float, total: int) -> list[int]:
    counts = list(counts)
    exact = [c * fraction for c in counts]
    alloc = [min(c, math.floor(e)) for c, e in zip(counts, exact)]
    order = sorted(range(len(counts)), key=lambda i: (-(exact[i] - math.floor(exact[i])), i))
    i = 0
    while sum(alloc) < total and i < 2 * len(order):
        j = order[i % len(order)]
        if alloc[j] < counts[j]:
            alloc[j] += 1
        i += 1
    return alloc


def split_train_val(ds: TimeSeriesDataset, train_fraction: float = 0.8, seed: int = 0,
                    stratify: bool = True) -> tuple[TimeSeriesDataset, TimeSeriesDataset]:
    """Shuffled, disjoint train/validation partition.

    The training side receives ``ceil(n * train_fraction)`` samples. With
    ``stratify`` the per-class quotas are assigned by largest remainder so
    both sides keep positives; indices within each side stay in shuffled
    order.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    n = len(ds)
    n_train = math.ceil(n * train_fraction - 1e-12)
    if n_train == 0 or n_train == n:
        raise EmptySplit(f"split of {n} samples at {train_fraction} leaves a side empty")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    if not stratify:
        tr, va = perm[:n_train], perm[n_train:]
    else:
        classes = [c for c in (0, 1) if (ds.labels == c).any()]
        per_class = [perm[ds.labels[perm] == c] for c in classes]
        quotas = _largest_remainder([len(p) for p in per_class], train_fraction, n_train)
        tr_parts = [p[:q] for p, q in zip(per_class, quotas)]
        tr_set = set(np.concatenate(tr_parts).tolist())
        tr = np.array([i for i in perm if i in tr_set], dtype=np.int64)
        va = np.array([i for i in perm if i not in tr_set], dtype=np.int64)
    if len(tr) == 0 or len(va) == 0:
        raise EmptySplit("a side of the split is empty")
    return ds.subset(tr, "train"), ds.subset(va, "validation")
