"""Mini-batch Adam training with early stopping, and MSE evaluation."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .data import WindowSet
from .errors import ConfigurationError, DivergenceError, InsufficientDataError, ShapeError
from .models import ModelSpec, init_model_params, loss_and_grads, predict
from .numcore import AdamState, adam_step

logger = logging.getLogger(__name__)

LEARNING_RATES = (0.1, 0.01, 0.001)
INPUT_LENS = (3, 5, 7, 9, 11, 13)
SUBSTEPS = (2, 3, 4, 5, 6, 7, 8)
MIN_IMPROVEMENT = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    input_len: int = 5
    seed: int = 0
    substeps: int = 1
    max_epochs: int = 2000
    patience: int = 50
    batch_size: int = 32

    def __post_init__(self):
        if not (self.learning_rate > 0 and math.isfinite(self.learning_rate)):
            raise ConfigurationError(f"learning_rate must be positive, got {self.learning_rate}")
        for name in ("input_len", "substeps", "max_epochs", "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be >= 1")
        if self.patience < 0:
            raise ConfigurationError("patience must be >= 0")


@dataclass
class TrainReport:
    best_params: object
    best_val_mse: float
    test_mse: float
    epochs_run: int
    train_mse: float = math.inf
    loss_curve: list = field(default_factory=list)
    diverged: bool = False


class EarlyStopping:
    """Track the best validation score; signal a stop after ``patience`` stale epochs."""

    def __init__(self, patience: int, min_delta: float = MIN_IMPROVEMENT):
        self.patience = patience
        self.min_delta = min_delta
        self.best = math.inf
        self.stale = 0

    def update(self, score: float) -> bool:
        """Record one epoch's score; returns True when it is a new best."""
        if score < self.best - self.min_delta:
            self.best = score
            self.stale = 0
            return True
        self.stale += 1
        return False

    @property
    def should_stop(self) -> bool:
        return self.stale >= self.patience


def evaluate(params, spec: ModelSpec, windows: WindowSet) -> float:
    """Mean squared one-step error over ``windows`` (in the units of the data given)."""
    if len(windows) == 0:
        raise InsufficientDataError("cannot evaluate on an empty window set")
    with np.errstate(over="ignore", invalid="ignore"):
        diff = predict(params, spec, windows.inputs) - windows.targets
        return float(np.mean(diff * diff))


def _diverged_report(params, epoch, curve) -> TrainReport:
    return TrainReport(params, math.inf, math.inf, epoch, math.inf, curve, diverged=True)


def train_model(spec: ModelSpec, train: WindowSet, val: WindowSet, config: TrainConfig,
                test: WindowSet | None = None) -> TrainReport:
    """Fit one configuration; the returned parameters are those with the best validation MSE.

    A non-finite loss or parameter at any point aborts the run and reports an
    infinite error instead of raising.
    """
    for ws in (train, val) + ((test,) if test is not None else ()):
        if ws.input_len != spec.input_len:
            raise ShapeError(f"windows have input_len {ws.input_len}, model expects {spec.input_len}")
    if len(val) == 0 or len(train) == 0:
        raise InsufficientDataError("training and validation windows must be nonempty")

    params = init_model_params(spec, config.seed)
    state = AdamState.for_params(params)
    rng = np.random.Generator(np.random.PCG64([config.seed, 1]))
    stopper = EarlyStopping(config.patience)
    best_params, best_train = params, math.inf
    curve: list[tuple[float, float]] = []
    n = len(train)

    epoch = 0
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for epoch in range(1, config.max_epochs + 1):
            order = rng.permutation(n)
            try:
                for start in range(0, n, config.batch_size):
                    idx = order[start:start + config.batch_size]
                    loss, grads = loss_and_grads(params, spec, train.inputs[idx], train.targets[idx])
                    if not math.isfinite(loss):
                        raise DivergenceError(f"non-finite training loss in epoch {epoch}")
                    params, state = adam_step(params, grads, state, config.learning_rate)
                train_mse = evaluate(params, spec, train)
                val_mse = evaluate(params, spec, val)
            except DivergenceError as exc:
                logger.info("run diverged: %s", exc)
                return _diverged_report(params, epoch, curve)
            if not (math.isfinite(train_mse) and math.isfinite(val_mse) and params.all_finite()):
                logger.info("run diverged in epoch %d", epoch)
                return _diverged_report(params, epoch, curve)
            curve.append((train_mse, val_mse))
            if stopper.update(val_mse):
                best_params, best_train = params, train_mse
            if stopper.should_stop:
                break

    test_mse = evaluate(best_params, spec, test) if test is not None else math.nan
    if test is not None and not math.isfinite(test_mse):
        test_mse = math.inf
    return TrainReport(best_params, stopper.best, test_mse, epoch, best_train, curve)
