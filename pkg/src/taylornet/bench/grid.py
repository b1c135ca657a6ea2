"""Cartesian grid execution over datasets, models and hyperparameters."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..data import apply_scaler, fit_scaler, make_windows, split_series
from ..errors import InsufficientDataError
from ..models import ModelKind, ModelSpec
from ..train import TrainConfig, train_model
from .manifest import RunManifest

logger = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_DIVERGED = "diverged"
STATUS_SKIPPED = "skipped"


@dataclass(frozen=True)
class RunRecord:
    dataset: str
    model: ModelKind
    learning_rate: float
    input_len: int
    seed: int
    substeps: int
    epochs_run: int = 0
    train_mse: float = math.nan
    val_mse: float = math.nan
    test_mse: float = math.nan
    status: str = STATUS_OK
    note: str = ""

    @property
    def sort_key(self):
        return (self.dataset, self.model.rank, self.learning_rate, self.input_len,
                self.seed, self.substeps)


@dataclass(frozen=True)
class _Cell:
    dataset: str
    segments: tuple  # scaled train/val/test arrays
    spec_args: tuple  # (kind, input_len, hidden_size, substeps)
    config: TrainConfig


def _run_cell(cell: _Cell) -> RunRecord:
    kind, input_len, hidden, m = cell.spec_args
    cfg = cell.config
    key = dict(dataset=cell.dataset, model=kind, learning_rate=cfg.learning_rate,
               input_len=input_len, seed=cfg.seed, substeps=m)
    try:
        train, val, test = (make_windows(seg, input_len) for seg in cell.segments)
    except InsufficientDataError as exc:
        return RunRecord(**key, status=STATUS_SKIPPED, note=str(exc))
    spec = ModelSpec(kind, input_len, hidden, 1.0, m)
    report = train_model(spec, train, val, cfg, test)
    if report.diverged:
        return RunRecord(**key, epochs_run=report.epochs_run, train_mse=math.inf,
                         val_mse=math.inf, test_mse=math.inf, status=STATUS_DIVERGED)
    return RunRecord(**key, epochs_run=report.epochs_run, train_mse=report.train_mse,
                     val_mse=report.best_val_mse, test_mse=report.test_mse)


def grid_cells(manifest: RunManifest) -> list[_Cell]:
    """Enumerate every grid cell; data is loaded, split and scaled once per dataset."""
    manifest.validate()
    cells = []
    for entry in manifest.datasets:
        series = entry.load()
        parts = split_series(series, manifest.split)
        scaler = fit_scaler(parts[0])
        segments = tuple(apply_scaler(scaler, p.values) for p in parts)
        for kind in manifest.models:
            steps = manifest.substeps if kind.is_recursive else [1]
            for lr in manifest.learning_rates:
                for L in manifest.input_lens:
                    for seed in manifest.seeds:
                        for m in steps:
                            cfg = TrainConfig(lr, L, seed, m, manifest.max_epochs,
                                              manifest.patience, manifest.batch_size)
                            cells.append(_Cell(entry.name, segments,
                                               (kind, L, manifest.hidden_size, m), cfg))
    return cells


def run_grid(manifest: RunManifest, workers: int | None = None, progress=None) -> list[RunRecord]:
    """Train every cell and return records in canonical order.

    Canonical order is (dataset, model, learning_rate, input_len, seed,
    substeps), independent of ``workers``.
    """
    cells = grid_cells(manifest)
    workers = workers or manifest.workers
    logger.info("running %d grid cells on %d worker(s)", len(cells), workers)
    if workers == 1:
        results = []
        for i, cell in enumerate(cells, 1):
            results.append(_run_cell(cell))
            if progress:
                progress(i, len(cells), results[-1])
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = []
            for i, rec in enumerate(pool.map(_run_cell, cells), 1):
                results.append(rec)
                if progress:
                    progress(i, len(cells), rec)
    return sorted(results, key=lambda r: r.sort_key)


def persistence_mse(windows) -> float:
    """MSE of predicting each target by the window's last value."""
    diff = windows.targets - windows.inputs[:, -1]
    return float(np.mean(diff * diff))
