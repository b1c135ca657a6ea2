import math

import numpy as np
import pytest

from taylornet.data import WindowSet, apply_scaler, fit_scaler, make_windows
from taylornet.errors import InsufficientDataError, ShapeError
from taylornet.models import ModelSpec
from taylornet.numcore import MlpParams
from taylornet.train import EarlyStopping, TrainConfig, evaluate, train_model


def _ramp_windows(input_len=5):
    x = np.arange(200.0)
    scaled = apply_scaler(fit_scaler(x[:140]), x)
    return tuple(make_windows(scaled[a:b], input_len) for a, b in ((0, 140), (140, 170), (170, 200)))


# ---------------------------------------------------------------- evaluate

def test_evaluate_perfect_predictions_is_zero():
    spec = ModelSpec("residual", 2, 3)
    ws = WindowSet(np.array([[0.0, 1.0], [5.0, 2.0]]), np.array([1.0, 2.0]))
    assert evaluate(MlpParams.zeros(2, 3, 1), spec, ws) == 0.0


def test_evaluate_hand_value():
    # persistence predictions (1, 2) against targets (1, 4)
    spec = ModelSpec("residual", 2, 3)
    ws = WindowSet(np.array([[0.0, 1.0], [5.0, 2.0]]), np.array([1.0, 4.0]))
    assert evaluate(MlpParams.zeros(2, 3, 1), spec, ws) == 2.0


def test_evaluate_order_invariant(rng):
    from taylornet.models import init_model_params
    spec = ModelSpec("taylor2", 4, 8)
    p = init_model_params(spec, 1)
    X, y = rng.normal(size=(50, 4)), rng.normal(size=50)
    perm = rng.permutation(50)
    a = evaluate(p, spec, WindowSet(X, y))
    b = evaluate(p, spec, WindowSet(X[perm], y[perm]))
    assert a == pytest.approx(b, rel=1e-14)


def test_evaluate_empty():
    with pytest.raises(InsufficientDataError):
        evaluate(MlpParams.zeros(2, 3, 1), ModelSpec("residual", 2, 3),
                 WindowSet(np.zeros((0, 2)), np.zeros(0)))


# ---------------------------------------------------------------- early stopping

@pytest.mark.parametrize("patience", [0, 1, 5, 50])
def test_worsening_validation_stops_after_patience_plus_one(patience):
    stopper = EarlyStopping(patience)
    epochs = 0
    for score in np.arange(1.0, 1000.0):
        epochs += 1
        stopper.update(score)
        if stopper.should_stop:
            break
    assert epochs == patience + 1


def test_improvement_threshold():
    stopper = EarlyStopping(3)
    assert stopper.update(1.0)
    assert not stopper.update(1.0 - 5e-13)
    assert stopper.update(1.0 - 2e-12)


# ---------------------------------------------------------------- training

def test_constant_series_residual_is_exact():
    c = np.full(60, 0.37)
    train, val = make_windows(c[:40], 5), make_windows(c[40:], 5)
    report = train_model(ModelSpec("residual", 5), train, val, TrainConfig(0.01, 5, 0))
    assert report.train_mse <= 1e-8


def test_ramp_residual_reaches_small_test_error():
    train, val, test = _ramp_windows()
    report = train_model(ModelSpec("residual", 5), train, val, TrainConfig(0.01, 5, 0), test)
    assert report.test_mse <= 1e-4


def test_training_is_deterministic():
    train, val, test = _ramp_windows()
    spec = ModelSpec("recursive_taylor2", 5, 16, substeps=2)
    cfg = TrainConfig(0.01, 5, 3, substeps=2, max_epochs=30, patience=10)
    a = train_model(spec, train, val, cfg, test)
    b = train_model(spec, train, val, cfg, test)
    assert a.test_mse == b.test_mse and a.loss_curve == b.loss_curve
    for k, v in a.best_params.as_dict().items():
        assert v.tobytes() == b.best_params.as_dict()[k].tobytes()


def test_best_params_are_restored():
    train, val, test = _ramp_windows()
    spec = ModelSpec("taylor2", 5, 16)
    report = train_model(spec, train, val, TrainConfig(0.1, 5, 0, max_epochs=60, patience=15), test)
    vals = [v for _, v in report.loss_curve]
    assert report.best_val_mse == min(vals)
    assert evaluate(report.best_params, spec, val) == report.best_val_mse
    assert report.epochs_run == len(report.loss_curve)


def test_divergence_is_recorded_not_raised():
    train, val, test = _ramp_windows()
    report = train_model(ModelSpec("taylor3", 5, 8), train, val,
                         TrainConfig(1e300, 5, 0, max_epochs=5), test)
    assert report.diverged
    assert report.test_mse == math.inf and report.best_val_mse == math.inf


def test_shape_mismatch():
    train, val, _ = _ramp_windows(5)
    with pytest.raises(ShapeError):
        train_model(ModelSpec("residual", 4), train, val, TrainConfig(0.01, 4, 0))
