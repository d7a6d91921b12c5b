"""Labeled dataset I/O, synthetic fixtures and the train/test split."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "DataError",
    "Dataset",
    "FORMATS",
    "gen_synthetic",
    "load_dataset",
    "stratified_split",
    "write_dataset",
]

FORMATS = ("csv-labeled", "ucr-tsv")
KINDS = ("orthogonal-patterns", "sine-vs-square")


class DataError(ValueError):
    """Unreadable or malformed dataset."""


@dataclass
class Dataset:
    X: np.ndarray  # (N, n) float64
    y: np.ndarray  # (N,) int64

    def __len__(self):
        return int(self.y.shape[0])

    @property
    def width(self) -> int:
        return int(self.X.shape[1])

    def subset(self, idx) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx])


def _parse_label(field: str, lineno: int) -> int:
    try:
        return int(field)
    except ValueError:
        pass
    try:
        value = float(field)
    except ValueError:
        raise DataError(f"line {lineno}: label {field!r} is not a number") from None
    if not value.is_integer():
        raise DataError(f"line {lineno}: label {field!r} is not an integer")
    return int(value)


def parse_dataset(text: str, fmt: str = "csv-labeled", header: bool = False, source: str = "<string>") -> Dataset:
    if fmt not in FORMATS:
        raise DataError(f"unknown dataset format {fmt!r}")
    sep = "," if fmt == "csv-labeled" else "\t"
    rows, labels = [], []
    arity = None
    lines = text.splitlines()
    for lineno, line in enumerate(lines, 1):
        if header and lineno == 1:
            continue
        if not line.strip():
            continue
        fields = [f.strip() for f in line.strip().split(sep)]
        if fmt == "ucr-tsv" and len(fields) == 1:
            fields = line.split()
        if len(fields) < 2:
            raise DataError(f"{source}: line {lineno}: need a label and at least one value")
        if arity is None:
            arity = len(fields)
        elif len(fields) != arity:
            raise DataError(f"{source}: line {lineno}: expected {arity} fields, found {len(fields)}")
        labels.append(_parse_label(fields[0], lineno))
        try:
            rows.append([float(f) for f in fields[1:]])
        except ValueError:
            bad = next(f for f in fields[1:] if not _is_float(f))
            raise DataError(f"{source}: line {lineno}: non-numeric value {bad!r}") from None
    if not rows:
        raise DataError(f"{source}: no samples")
    X = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise DataError(f"{source}: non-finite values")
    return Dataset(X, np.asarray(labels, dtype=np.int64))


def _is_float(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def load_dataset(path, fmt: str = "csv-labeled", header: bool = False) -> Dataset:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    return parse_dataset(text, fmt, header, source=str(path))


def write_dataset(ds: Dataset, path, fmt: str = "csv-labeled") -> None:
    sep = "," if fmt == "csv-labeled" else "\t"
    lines = [sep.join([str(int(label))] + [repr(float(v)) for v in row]) for row, label in zip(ds.X, ds.y)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def gen_synthetic(kind: str, n_per_class: int, length: int, noise: float = 0.0, seed: int = 0,
                  classes: int = 4, v_max: float = 255.0, cycles: float = 4.0,
                  jitter: float = 0.1, square_amplitude: float = 1.0) -> Dataset:
    """Desk-scale stand-in datasets; samples are interleaved by class.

    ``orthogonal-patterns``: ``classes`` patterns over ``length`` inputs, each
    at ``v_max`` on its own contiguous block and 0 elsewhere.

    ``sine-vs-square``: class 0 is a sine, class 1 a square wave, both with
    ``cycles`` periods per series, full scale [0, v_max] and a phase drawn
    uniformly from ``[-jitter, jitter]`` periods (``jitter=0.5`` is a fully
    random phase).

    Both add uniform noise in ``[-noise, noise]`` and clip to [0, v_max].
    """
    if n_per_class < 1 or length < 1 or noise < 0:
        raise DataError("n_per_class and length must be positive, noise nonnegative")
    rng = np.random.Generator(np.random.PCG64(seed))
    if kind == "orthogonal-patterns":
        if classes < 1 or classes > length:
            raise DataError(f"cannot fit {classes} disjoint patterns into {length} inputs")
        bounds = np.linspace(0, length, classes + 1).round().astype(int)
        protos = np.zeros((classes, length))
        for c in range(classes):
            protos[c, bounds[c]:bounds[c + 1]] = v_max
    elif kind == "sine-vs-square":
        classes = 2
        protos = None
    else:
        raise DataError(f"unknown synthetic kind {kind!r}")

    X, y = [], []
    t = np.arange(length) / length
    for i in range(n_per_class * classes):
        c = i % classes
        if protos is not None:
            row = protos[c].copy()
        else:
            phase = 2 * np.pi * rng.uniform(-jitter, jitter)
            wave = np.sin(2 * np.pi * cycles * t + phase)
            if c == 1:
                wave = np.where(wave >= 0, square_amplitude, -square_amplitude)
            row = (wave + 1.0) * v_max / 2
        if noise > 0:
            row = row + rng.uniform(-noise, noise, size=length)
        X.append(np.clip(row, 0.0, v_max))
        y.append(c)
    return Dataset(np.asarray(X), np.asarray(y, dtype=np.int64))


def stratified_split(labels, seed: int = 0, test_every: int = 5):
    """Seeded stratified interleave: every ``test_every``-th sample of each
    shuffled class goes to test (20% by default).

    Returns ``(train_idx, test_idx)`` in original dataset order.
    """
    labels = np.asarray(labels)
    rng = np.random.Generator(np.random.PCG64(seed))
    train, test = [], []
    for c in np.unique(labels):
        idx = np.nonzero(labels == c)[0]
        idx = idx[rng.permutation(idx.size)]
        for k, i in enumerate(idx):
            (test if k % test_every == test_every - 1 else train).append(int(i))
    return np.array(sorted(train), dtype=np.int64), np.array(sorted(test), dtype=np.int64)
