"""scikit-learn compatible wrapper around :func:`~taylornet.train.train_model`."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .data import WindowSet
from .errors import ConfigurationError, DivergenceError
from .models import ModelKind, ModelSpec, predict
from .train import TrainConfig, train_model


class TaylorNetRegressor(RegressorMixin, BaseEstimator):
    """One-step-ahead forecaster fitted on sliding windows.

    ``X`` holds one window per row (oldest value first) and ``y`` the value
    that follows each window.  Any :class:`~taylornet.models.ModelKind` can be
    selected, so the baselines are available through the same interface.

    Parameters
    ----------
    kind : str
        Model kind, e.g. ``"taylor2"``, ``"recursive_taylor2"``, ``"residual"``.
    hidden_size : int
        Width of the hidden layer (or LSTM state).
    delta_t : float
        Sampling interval used in the Taylor terms.
    substeps : int or None
        Substeps per interval for recursive kinds; ``None`` means 1 for
        non-recursive kinds and 2 otherwise.
    validation_fraction : float
        Trailing share of the rows held out for early stopping when no
        explicit validation set is passed to :meth:`fit`.
    random_state : int
        Seed for initialization and batch shuffling.

    Attributes
    ----------
    params_ : MlpParams or LstmParams
        Weights with the best validation error.
    report_ : TrainReport
    n_features_in_ : int
    """

    def __init__(self, kind="taylor2", hidden_size=128, delta_t=1.0, substeps=None,
                 learning_rate=0.01, max_epochs=2000, patience=50, batch_size=32,
                 validation_fraction=0.15, random_state=0):
        self.kind = kind
        self.hidden_size = hidden_size
        self.delta_t = delta_t
        self.substeps = substeps
        self.learning_rate = learning_rate
        self.max_epochs = max_epochs
        self.patience = patience
        self.batch_size = batch_size
        self.validation_fraction = validation_fraction
        self.random_state = random_state

    def _spec(self, input_len):
        kind = ModelKind.parse(self.kind)
        m = self.substeps if self.substeps is not None else (2 if kind.is_recursive else 1)
        return ModelSpec(kind, input_len, self.hidden_size, self.delta_t, m)

    def fit(self, X, y, X_val=None, y_val=None):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        if X_val is None:
            if not 0 < self.validation_fraction < 1:
                raise ConfigurationError("validation_fraction must lie in (0, 1)")
            n_val = max(1, int(round(len(y) * self.validation_fraction)))
            if n_val >= len(y):
                raise ConfigurationError("too few rows to hold out a validation set")
            X, X_val, y, y_val = X[:-n_val], X[-n_val:], y[:-n_val], y[-n_val:]
        else:
            X_val, y_val = check_X_y(X_val, y_val, dtype=np.float64, y_numeric=True)

        spec = self._spec(X.shape[1])
        config = TrainConfig(self.learning_rate, spec.input_len, int(self.random_state),
                             spec.substeps, self.max_epochs, self.patience, self.batch_size)
        report = train_model(spec, WindowSet(X, y), WindowSet(X_val, y_val), config)
        if report.diverged:
            raise DivergenceError(f"training diverged after {report.epochs_run} epochs")
        self.spec_ = spec
        self.params_ = report.best_params
        self.report_ = report
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "params_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but {type(self).__name__} was fitted "
                f"with {self.n_features_in_}"
            )
        return predict(self.params_, self.spec_, X)
