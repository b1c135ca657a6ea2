"""Predictor equations: direct, residual, Taylor orders 1-3, recursive rollouts, LSTM.

All predictors share one graph builder per kind (:func:`prediction_graph`) so
that evaluation and training differentiate exactly the same computation.
Windows may be a single vector of length ``input_len`` or a 2-D batch with one
window per row; outputs are a scalar or a vector accordingly.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import ConfigurationError, DivergenceError, ShapeError
from .numcore import tape as T
from .numcore.params import (
    DEFAULT_HIDDEN,
    LstmParams,
    MlpParams,
    check_input,
    init_lstm_params,
    init_params,
    mlp_graph,
)

ArrayOrNode = Union[np.ndarray, T.Node]
DerivativeField = Callable[[ArrayOrNode], Sequence[ArrayOrNode]]


class ModelKind(str, enum.Enum):
    DIRECT = "direct"
    RESIDUAL = "residual"
    LSTM = "lstm"
    TAYLOR1 = "taylor1"
    TAYLOR2 = "taylor2"
    TAYLOR3 = "taylor3"
    RECURSIVE_RESIDUAL = "recursive_residual"
    RECURSIVE_TAYLOR2 = "recursive_taylor2"
    RECURSIVE_TAYLOR3 = "recursive_taylor3"

    @property
    def is_recursive(self) -> bool:
        return self.value.startswith("recursive_")

    @property
    def taylor_order(self) -> int:
        return {"2": 2, "3": 3}.get(self.value[-1], 1)

    @property
    def uses_skip(self) -> bool:
        return self not in (ModelKind.DIRECT, ModelKind.LSTM)

    @property
    def label(self) -> str:
        return _LABELS[self]

    @property
    def rank(self) -> int:
        return list(ModelKind).index(self)

    @classmethod
    def parse(cls, name) -> "ModelKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "_").replace(" ", "_")
        key = _ALIASES.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ConfigurationError(
                f"unknown model kind {name!r}; choose from {[k.value for k in cls]}"
            ) from None


_LABELS = {
    ModelKind.DIRECT: "CNN",
    ModelKind.RESIDUAL: "ResNet",
    ModelKind.TAYLOR1: "Taylor 1",
    ModelKind.TAYLOR2: "Taylor 2",
    ModelKind.TAYLOR3: "Taylor 3",
    ModelKind.RECURSIVE_RESIDUAL: "R ResNet",
    ModelKind.RECURSIVE_TAYLOR2: "R Taylor 2",
    ModelKind.RECURSIVE_TAYLOR3: "R Taylor 3",
    ModelKind.LSTM: "LSTM",
}
_ALIASES = {
    "cnn": "direct",
    "resnet": "residual",
    "r_resnet": "recursive_residual",
    "r_taylor_2": "recursive_taylor2",
    "r_taylor_3": "recursive_taylor3",
    "taylor_1": "taylor1",
    "taylor_2": "taylor2",
    "taylor_3": "taylor3",
}


@dataclass(frozen=True)
class ModelSpec:
    kind: ModelKind
    input_len: int
    hidden_size: int = DEFAULT_HIDDEN
    delta_t: float = 1.0
    substeps: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind.parse(self.kind))
        if int(self.input_len) != self.input_len or self.input_len < 1:
            raise ConfigurationError(f"input_len must be a positive integer, got {self.input_len}")
        if int(self.hidden_size) != self.hidden_size or self.hidden_size < 1:
            raise ConfigurationError(f"hidden_size must be a positive integer, got {self.hidden_size}")
        if not (math.isfinite(self.delta_t) and self.delta_t > 0):
            raise ConfigurationError(f"delta_t must be finite and positive, got {self.delta_t}")
        if self.kind.is_recursive:
            if int(self.substeps) != self.substeps or self.substeps < 2:
                raise ConfigurationError(f"{self.kind.value} needs substeps >= 2, got {self.substeps}")
        elif self.substeps != 1:
            raise ConfigurationError(f"{self.kind.value} is not recursive; substeps must be 1")

    @property
    def taylor_order(self) -> int:
        return self.kind.taylor_order

    @property
    def output_len(self) -> int:
        """Output units of the backbone MLP (one head per order, per element if recursive)."""
        if self.kind.is_recursive:
            return self.taylor_order * self.input_len
        if self.kind is ModelKind.LSTM:
            return 1
        return self.taylor_order if self.kind.uses_skip else 1


def init_model_params(spec: ModelSpec, seed: int):
    if spec.kind is ModelKind.LSTM:
        return init_lstm_params(seed, spec.hidden_size)
    return init_params(seed, spec.input_len, spec.hidden_size, spec.output_len)


# -- shared arithmetic -------------------------------------------------------

def _value(x: ArrayOrNode) -> np.ndarray:
    return x.value if isinstance(x, T.Node) else np.asarray(x)


def taylor_increment(heads: Sequence[ArrayOrNode], step: float):
    """``step*h1 + step^2/2*h2 + step^3/6*h3`` over however many heads are given."""
    total = None
    for k, head in enumerate(heads, start=1):
        term = (step ** k / math.factorial(k)) * head
        total = term if total is None else total + term
    return total


def recursive_rollout(field: DerivativeField, window, delta_t: float, m: int,
                      order: int = 1):
    """Carry a window state one sampling interval forward in ``m`` Taylor substeps.

    ``field`` maps a state to a sequence of per-order derivative vectors, each
    shaped like the state.  Works on arrays and on tape nodes alike.
    """
    if int(m) != m or m < 1:
        raise ConfigurationError(f"substeps must be a positive integer, got {m}")
    if order not in (1, 2, 3):
        raise ConfigurationError(f"order must be 1, 2 or 3, got {order}")
    state = window if isinstance(window, T.Node) else np.asarray(window, dtype=np.float64)
    step = delta_t / m
    for k in range(m):
        derivs = list(field(state))
        if len(derivs) < order:
            raise ShapeError(f"field returned {len(derivs)} orders, need {order}")
        for d in derivs[:order]:
            if np.shape(_value(d)) != np.shape(_value(state)):
                raise ShapeError(
                    f"field output shape {np.shape(_value(d))} != state shape "
                    f"{np.shape(_value(state))}"
                )
        state = state + taylor_increment(derivs[:order], step)
        if not np.all(np.isfinite(_value(state))):
            raise DivergenceError(f"rollout state became non-finite at substep {k + 1} of {m}")
    return state


# -- graph builders -----------------------------------------------------------

def _network_field(p, order: int, input_len: int) -> DerivativeField:
    def field(state):
        out = mlp_graph(p, state)
        return [out[..., k * input_len:(k + 1) * input_len] for k in range(order)]
    return field


def _lstm_graph(p, x: np.ndarray) -> T.Node:
    hsize = p["w_hh"].value.shape[1]
    h = np.zeros(x.shape[:-1] + (hsize,))
    c = np.zeros_like(h)
    for t in range(x.shape[-1]):
        z = T.add(T.add(T.matmul(x[..., t:t + 1], p["w_ih"]), T.matmul(h, p["w_hh"])), p["b"])
        i = T.sigmoid(z[..., :hsize])
        f = T.sigmoid(z[..., hsize:2 * hsize])
        g = T.tanh(z[..., 2 * hsize:3 * hsize])
        o = T.sigmoid(z[..., 3 * hsize:])
        c = f * c + i * g
        h = o * T.tanh(c)
    return T.add(T.matmul(h, p["w_out"]), p["b_out"])[..., 0]


def prediction_graph(p: dict, spec: ModelSpec, x: np.ndarray) -> T.Node:
    """Record one prediction per window row for ``spec.kind``; ``p`` holds leaf nodes."""
    kind = spec.kind
    if kind is ModelKind.LSTM:
        return _lstm_graph(p, x)
    if kind.is_recursive:
        field = _network_field(p, spec.taylor_order, spec.input_len)
        final = recursive_rollout(field, x, spec.delta_t, spec.substeps, spec.taylor_order)
        return final[..., -1]
    out = mlp_graph(p, x)
    if kind is ModelKind.DIRECT:
        return out[..., 0]
    step = 1.0 if kind is ModelKind.RESIDUAL else spec.delta_t
    heads = [out[..., k] for k in range(spec.taylor_order)]
    return taylor_increment(heads, step) + x[..., -1]


def _check_params(params, spec: ModelSpec):
    if spec.kind is ModelKind.LSTM:
        if not isinstance(params, LstmParams):
            raise ShapeError("LSTM models need LstmParams")
        return
    if not isinstance(params, MlpParams):
        raise ShapeError(f"{spec.kind.value} models need MlpParams")
    if params.input_len != spec.input_len:
        raise ShapeError(f"network takes {params.input_len} inputs, window has {spec.input_len}")
    if params.output_len != spec.output_len:
        raise ShapeError(
            f"{spec.kind.value} needs {spec.output_len} output heads, network has {params.output_len}"
        )


def predict(params, spec: ModelSpec, windows):
    """Evaluate any model kind on one window or a batch of windows."""
    _check_params(params, spec)
    x = check_input(windows, spec.input_len)
    tape = T.Tape()
    out = prediction_graph(params.leaves(tape), spec, x).value
    return float(out) if out.ndim == 0 else out.copy()


def loss_and_grads(params, spec: ModelSpec, windows, targets):
    """Mean squared error over the batch and its parameter gradients."""
    _check_params(params, spec)
    x = check_input(windows, spec.input_len)
    tape = T.Tape()
    loss = T.mse(prediction_graph(params.leaves(tape), spec, x), np.asarray(targets, dtype=np.float64))
    value = float(loss.value)
    return value, T.backward(tape, loss)


# -- per-equation entry points ------------------------------------------------

def _spec_for(params: MlpParams, kind, **kw) -> ModelSpec:
    return ModelSpec(kind, params.input_len, params.hidden_size, **kw)


def predict_direct(params: MlpParams, window):
    """Plain network output, no skip connection."""
    return predict(params, _spec_for(params, ModelKind.DIRECT), window)


def predict_residual(params: MlpParams, window):
    """Last window element plus the network output."""
    return predict(params, _spec_for(params, ModelKind.RESIDUAL), window)


def predict_taylor(params: MlpParams, window, delta_t: float = 1.0, order: int = 1):
    """Taylor expansion around the last window element using the network's heads."""
    kinds = {1: ModelKind.TAYLOR1, 2: ModelKind.TAYLOR2, 3: ModelKind.TAYLOR3}
    if order not in kinds:
        raise ConfigurationError(f"order must be 1, 2 or 3, got {order}")
    return predict(params, _spec_for(params, kinds[order], delta_t=delta_t), window)


def predict_recursive(params: MlpParams, spec: ModelSpec, window):
    """Final-state last element of an ``spec.substeps``-step rollout of the network field."""
    if not spec.kind.is_recursive:
        raise ConfigurationError(f"{spec.kind.value} is not a recursive kind")
    return predict(params, spec, window)


def lstm_predict(params: LstmParams, window):
    x = check_input(window)
    if x.ndim == 0 or x.shape[-1] < 1:
        raise ShapeError("window must contain at least one element")
    spec = ModelSpec(ModelKind.LSTM, x.shape[-1], params.hidden_size)
    return predict(params, spec, x)
