"""Series ingestion, chronological splits, min-max scaling and sliding windows."""
from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import ConfigurationError, DataParseError, InputError, InsufficientDataError

DEGENERATE_RANGE = 1e-12


@dataclass
class TimeSeries:
    name: str
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if self.values.size < 1:
            raise InsufficientDataError(f"series {self.name!r} is empty")
        if not np.all(np.isfinite(self.values)):
            raise InputError(f"series {self.name!r} contains non-finite values")

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.7
    val_frac: float = 0.15
    test_frac: float = 0.15

    def __post_init__(self):
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if any(not (f > 0) for f in fracs):
            raise ConfigurationError(f"split fractions must all be positive, got {fracs}")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise ConfigurationError(f"split fractions must sum to 1, got {sum(fracs)}")


@dataclass
class WindowSet:
    """Supervised pairs: ``inputs[i] = values[i:i+L]`` predicts ``targets[i] = values[i+L]``."""

    inputs: np.ndarray
    targets: np.ndarray
    input_len: int = field(init=False)

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.float64)
        self.targets = np.asarray(self.targets, dtype=np.float64)
        self.input_len = self.inputs.shape[1]

    def __len__(self):
        return self.targets.size


# -- loading -------------------------------------------------------------------

_SPLIT_RE = re.compile(r"[,\s]+")


def _split_row(line: str, delimiter: str | None) -> list[str]:
    if delimiter == ",":
        return next(csv.reader([line]))
    return [c for c in _SPLIT_RE.split(line.strip()) if c != ""]


def load_series(path, column=0, has_header: bool = False, name: str | None = None) -> TimeSeries:
    """Read one numeric column from a comma- or whitespace-delimited text file.

    ``column`` is a zero-based index or, with a header row, a column name.
    Blank lines are skipped; row numbers in errors are 1-based file lines.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such data file: {path}")
    lines = path.read_text().splitlines()
    delimiter = "," if any("," in ln for ln in lines[:50]) else None

    rows = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip()]
    if has_header:
        if not rows:
            raise DataParseError(f"{path}: empty file")
        header = [h.strip().strip('"') for h in _split_row(rows[0][1], delimiter)]
        rows = rows[1:]
        if isinstance(column, str) and not column.lstrip("-").isdigit():
            if column not in header:
                raise DataParseError(f"{path}: column {column!r} not in header {header}")
            column = header.index(column)
    if isinstance(column, str):
        if not column.lstrip("-").isdigit():
            raise DataParseError(f"{path}: column names need has_header=True")
        column = int(column)

    values = []
    for lineno, line in rows:
        cells = _split_row(line, delimiter)
        if column >= len(cells) or column < -len(cells):
            raise DataParseError(f"{path}: row {lineno} has no column {column}")
        cell = cells[column].strip().strip('"')
        try:
            values.append(float(cell))
        except ValueError:
            raise DataParseError(f"{path}: row {lineno}: non-numeric value {cell!r}") from None
    if len(values) < 2:
        raise InsufficientDataError(f"{path}: need at least 2 values, found {len(values)}")
    return TimeSeries(name or path.stem, np.array(values))


# -- splitting -----------------------------------------------------------------

def split_series(series: TimeSeries, spec: SplitSpec = SplitSpec()):
    """Contiguous train/val/test segments, cut at ``floor(n*train)`` and ``floor(n*(train+val))``."""
    n = len(series)
    a = math.floor(n * spec.train_frac)
    b = math.floor(n * (spec.train_frac + spec.val_frac))
    bounds = [(0, a), (a, b), (b, n)]
    parts = []
    for label, (lo, hi) in zip(("train", "val", "test"), bounds):
        if hi - lo < 1:
            raise ConfigurationError(f"{label} segment of {series.name!r} is empty (n={n})")
        parts.append(series.values[lo:hi].copy())
    return tuple(TimeSeries(f"{series.name}:{label}", v)
                 for label, v in zip(("train", "val", "test"), parts))


# -- scaling -------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingParams:
    min_val: float
    max_val: float
    degenerate: bool

    @property
    def range(self) -> float:
        return self.max_val - self.min_val


def fit_scaler(train) -> ScalingParams:
    values = np.asarray(getattr(train, "values", train), dtype=np.float64)
    if values.size == 0:
        raise InsufficientDataError("cannot fit a scaler on an empty series")
    lo, hi = float(values.min()), float(values.max())
    return ScalingParams(lo, hi, hi - lo < DEGENERATE_RANGE)


def apply_scaler(params: ScalingParams, values) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if params.degenerate:
        return np.full_like(values, 0.5)
    return (values - params.min_val) / params.range


def invert_scaler(params: ScalingParams, values) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if params.degenerate:
        return np.full_like(values, params.min_val)
    return values * params.range + params.min_val


class SeriesScaler(TransformerMixin, BaseEstimator):
    """Min-max scaler to [0, 1] for one univariate series.

    Unlike :class:`sklearn.preprocessing.MinMaxScaler`, a constant training
    series maps to 0.5 and inverts to its value.
    """

    def fit(self, X, y=None):
        self.params_ = fit_scaler(np.ravel(X))
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        return apply_scaler(self.params_, X)

    def inverse_transform(self, X):
        check_is_fitted(self, "params_")
        return invert_scaler(self.params_, X)


# -- windowing -----------------------------------------------------------------

def make_windows(values, input_len: int) -> WindowSet:
    values = np.asarray(getattr(values, "values", values), dtype=np.float64).reshape(-1)
    if int(input_len) != input_len or input_len < 1:
        raise ConfigurationError(f"input_len must be a positive integer, got {input_len}")
    n = values.size
    if n <= input_len:
        raise InsufficientDataError(f"series of length {n} is too short for input_len {input_len}")
    inputs = np.lib.stride_tricks.sliding_window_view(values, input_len)[:-1].copy()
    return WindowSet(inputs, values[input_len:].copy())


class SlidingWindows(TransformerMixin, BaseEstimator):
    """Turn a 1-D series into ``(X, y)`` window/target pairs."""

    def __init__(self, input_len: int = 5):
        self.input_len = input_len

    def fit(self, X=None, y=None):
        return self

    def transform(self, X):
        return make_windows(X, self.input_len).inputs

    def fit_transform(self, X, y=None, **fit_params):
        return self.transform(X)

    def split(self, X):
        ws = make_windows(X, self.input_len)
        return ws.inputs, ws.targets
