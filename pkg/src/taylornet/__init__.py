"""Taylor-series neural predictors for univariate time series."""
from .data import (
    ScalingParams,
    SeriesScaler,
    SlidingWindows,
    SplitSpec,
    TimeSeries,
    WindowSet,
    apply_scaler,
    fit_scaler,
    invert_scaler,
    load_series,
    make_windows,
    split_series,
)
from .estimators import TaylorNetRegressor
from .models import (
    ModelKind,
    ModelSpec,
    lstm_predict,
    predict,
    predict_direct,
    predict_recursive,
    predict_residual,
    predict_taylor,
    recursive_rollout,
)
from .train import TrainConfig, TrainReport, evaluate, train_model

__version__ = "0.1.0"

__all__ = [
    "ModelKind",
    "ModelSpec",
    "ScalingParams",
    "SeriesScaler",
    "SlidingWindows",
    "SplitSpec",
    "TaylorNetRegressor",
    "TimeSeries",
    "TrainConfig",
    "TrainReport",
    "WindowSet",
    "apply_scaler",
    "evaluate",
    "fit_scaler",
    "invert_scaler",
    "load_series",
    "lstm_predict",
    "make_windows",
    "predict",
    "predict_direct",
    "predict_recursive",
    "predict_residual",
    "predict_taylor",
    "recursive_rollout",
    "split_series",
    "train_model",
]
