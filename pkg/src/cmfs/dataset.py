"""Dataset ingestion, standardization and stratified splitting."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from cmfs.errors import DataError

__all__ = [
    "Dataset",
    "SplitPair",
    "Standardizer",
    "load_delimited",
    "parse_delimited",
    "standardize",
    "stratified_split",
]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Numeric feature matrix with named columns and integer-coded labels.

    ``features`` is stored column-major (n_samples x n_features, Fortran
    order) and marked read-only, so a Dataset can be shared freely.
    """

    features: np.ndarray
    feature_names: tuple[str, ...]
    labels: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        x = np.asfortranarray(np.asarray(self.features, dtype=np.float64))
        y = np.ascontiguousarray(np.asarray(self.labels, dtype=np.int64))
        if x.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {x.shape}")
        if y.shape != (x.shape[0],):
            raise DataError(f"{y.shape[0] if y.ndim else 0} labels for {x.shape[0]} samples")
        if not np.all(np.isfinite(x)):
            r, c = np.argwhere(~np.isfinite(x))[0]
            raise DataError(f"non-finite value at row {r}, column {c}")
        names = tuple(str(n) for n in self.feature_names)
        if len(names) != x.shape[1]:
            raise DataError(f"{len(names)} feature names for {x.shape[1]} columns")
        if any(not n for n in names):
            raise DataError("feature names must be non-empty")
        if len(set(names)) != len(names):
            raise DataError("feature names must be unique")
        classes = tuple(str(c) for c in self.class_names)
        if y.size and (y.min() < 0 or y.max() >= len(classes)):
            raise DataError("label codes out of range of class_names")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "class_names", classes)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def take_rows(self, index: Sequence[int]) -> Dataset:
        index = np.asarray(index, dtype=np.intp)
        return Dataset(self.features[index], self.feature_names, self.labels[index], self.class_names)

    def take_features(self, index: Sequence[int]) -> Dataset:
        index = np.asarray(index, dtype=np.intp)
        return Dataset(
            self.features[:, index],
            tuple(self.feature_names[i] for i in index),
            self.labels,
            self.class_names,
        )

    def with_features(self, features: np.ndarray) -> Dataset:
        return Dataset(features, self.feature_names, self.labels, self.class_names)

    def with_labels(self, labels: Sequence[int]) -> Dataset:
        return Dataset(self.features, self.feature_names, labels, self.class_names)


@dataclass(frozen=True, eq=False)
class SplitPair:
    train: Dataset
    test: Dataset
    seed: int
    train_index: np.ndarray
    test_index: np.ndarray


def _resolve_label_column(label: int | str, header: list[str] | None, n_cols: int) -> int:
    if isinstance(label, str) and label.lstrip("-").isdigit():
        label = int(label)
    if isinstance(label, str):
        if header is None:
            raise DataError(f"label column {label!r} given by name but the file has no header")
        if label not in header:
            raise DataError(f"label column {label!r} not found in header")
        return header.index(label)
    if not -n_cols <= label < n_cols:
        raise DataError(f"label column index {label} out of range for {n_cols} columns")
    return label % n_cols


def parse_delimited(
    stream: TextIO,
    delimiter: str | None = None,
    header: bool = True,
    label: int | str = -1,
) -> Dataset:
    """Parse delimited text into a :class:`Dataset`.

    Parameters
    ----------
    stream : text stream
        Comma- or tab-delimited rows; blank lines are ignored.
    delimiter : str, optional
        Field separator. Sniffed from the first line (tab if present,
        else comma) when omitted.
    header : bool
        Whether the first row holds column names.
    label : int or str
        Label column, by index (negative counts from the end) or by name.

    Class strings are coded in order of first appearance.
    """
    text = stream.read()
    lines = [(i + 1, ln) for i, ln in enumerate(text.splitlines()) if ln.strip()]
    if not lines:
        raise DataError("empty input")
    if delimiter is None:
        delimiter = "\t" if "\t" in lines[0][1] else ","
    rows = list(csv.reader((ln for _, ln in lines), delimiter=delimiter))
    rows = [[cell.strip() for cell in row] for row in rows]
    line_numbers = [n for n, _ in lines]

    names = None
    if header:
        names, rows, line_numbers = rows[0], rows[1:], line_numbers[1:]
    if not rows:
        raise DataError("no data rows")
    n_cols = len(names) if names is not None else len(rows[0])
    if n_cols < 2:
        raise DataError("need at least one feature column and a label column")
    label_col = _resolve_label_column(label, names, n_cols)
    feature_cols = [c for c in range(n_cols) if c != label_col]
    if names is None:
        names = [f"f{i}" for i in range(n_cols)]
        names[label_col] = "label"

    values = np.empty((len(rows), len(feature_cols)))
    raw_labels = []
    for r, (row, line_no) in enumerate(zip(rows, line_numbers)):
        if len(row) != n_cols:
            raise DataError(f"row {r} (line {line_no}) has {len(row)} fields, expected {n_cols}")
        for j, c in enumerate(feature_cols):
            cell = row[c]
            try:
                v = float(cell)
            except ValueError:
                raise DataError(
                    f"row {r} (line {line_no}), column {c} ({names[c]!r}): cannot parse {cell!r} as a number"
                ) from None
            if not math.isfinite(v):
                raise DataError(f"row {r} (line {line_no}), column {c} ({names[c]!r}): non-finite value {cell!r}")
            values[r, j] = v
        raw_labels.append(row[label_col])

    class_names: list[str] = []
    codes = {}
    for s in raw_labels:
        if s not in codes:
            codes[s] = len(class_names)
            class_names.append(s)
    if len(class_names) < 2:
        raise DataError(f"label column {names[label_col]!r} holds a single class")
    labels = np.array([codes[s] for s in raw_labels], dtype=np.int64)
    return Dataset(values, tuple(names[c] for c in feature_cols), labels, tuple(class_names))


def load_delimited(
    path: str | Path,
    delimiter: str | None = None,
    header: bool = True,
    label: int | str = -1,
) -> Dataset:
    """Read a delimited text file; see :func:`parse_delimited`."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"dataset file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        return parse_delimited(io.StringIO(fh.read()), delimiter=delimiter, header=header, label=label)


@dataclass(frozen=True, eq=False)
class Standardizer:
    """Per-feature affine map fitted on one dataset and reusable on others."""

    mean: np.ndarray
    std: np.ndarray
    degenerate: np.ndarray

    def apply(self, data: Dataset) -> Dataset:
        return data.with_features(self.transform(data.features))

    def transform(self, x: np.ndarray) -> np.ndarray:
        scale = np.where(self.degenerate, 1.0, self.std)
        z = (np.asarray(x, dtype=np.float64) - self.mean) / scale
        z[:, self.degenerate] = 0.0
        return z

    def inverse(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=np.float64) * np.where(self.degenerate, 0.0, self.std) + self.mean


def standardize(data: Dataset) -> tuple[Dataset, Standardizer]:
    """Center and scale each feature to zero mean and unit population std.

    Constant columns become all-zero and are flagged in ``degenerate``.
    """
    if data.n_samples < 2:
        raise DataError("standardize needs at least 2 samples")
    x = data.features
    degenerate = np.ptp(x, axis=0) == 0
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    scaler = Standardizer(mean=mean, std=std, degenerate=degenerate)
    return scaler.apply(data), scaler


def _train_counts(class_sizes: Sequence[int], train_fraction: float) -> list[int]:
    # round half to alternating direction, in class-code order
    counts = []
    round_up = True
    for m in class_sizes:
        target = train_fraction * m
        lower = math.floor(target)
        frac = target - lower
        if abs(frac - 0.5) < 1e-9:
            count = lower + 1 if round_up else lower
            round_up = not round_up
        else:
            count = lower + 1 if frac > 0.5 else lower
        if m >= 2:
            count = min(max(count, 1), m - 1)
        counts.append(min(count, m))
    return counts


def stratified_split(data: Dataset, train_fraction: float = 0.5, seed: int = 0) -> SplitPair:
    """Split rows per class into train/test halves with a seeded shuffle.

    Class ``c`` with ``m`` rows sends ``round(train_fraction * m)`` of them to
    train. Exact halves alternate between rounding up and down across
    classes, so an odd total lands on ``round(train_fraction * n)``. Classes
    with at least two rows always keep one row on each side.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DataError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    if seed < 0:
        raise DataError("seed must be non-negative")
    rng = np.random.default_rng(seed)
    members = [np.flatnonzero(data.labels == c) for c in range(data.n_classes)]
    counts = _train_counts([len(m) for m in members], train_fraction)
    train_parts = []
    for idx, count in zip(members, counts):
        train_parts.append(rng.permutation(idx)[:count])
    train_index = np.sort(np.concatenate(train_parts)).astype(np.intp)
    mask = np.ones(data.n_samples, dtype=bool)
    mask[train_index] = False
    test_index = np.flatnonzero(mask)
    return SplitPair(
        train=data.take_rows(train_index),
        test=data.take_rows(test_index),
        seed=seed,
        train_index=train_index,
        test_index=test_index,
    )
