"""Network weight containers, initialization and the MLP forward pass."""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from ..errors import InputError, ShapeError
from . import tape as T

DEFAULT_HIDDEN = 128


class _ParamsMixin:
    """Dict-style access shared by the weight containers."""

    def as_dict(self) -> dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, arrays):
        return cls(**{f.name: np.array(arrays[f.name], dtype=np.float64) for f in fields(cls)})

    def copy(self):
        return self.from_dict(self.as_dict())

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.as_dict().values())

    def n_params(self) -> int:
        return sum(a.size for a in self.as_dict().values())

    def leaves(self, tape: T.Tape) -> dict[str, T.Node]:
        return {k: tape.leaf(v, name=k) for k, v in self.as_dict().items()}


@dataclass(eq=False)
class MlpParams(_ParamsMixin):
    """Single-hidden-layer MLP: ``w2 @ sigmoid(w1 @ x + b1) + b2``."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        h, d = np.shape(self.w1)
        if np.shape(self.b1) != (h,) or np.shape(self.w2)[1:] != (h,):
            raise ShapeError("hidden dimensions of w1, b1, w2 disagree")
        if np.shape(self.b2) != (np.shape(self.w2)[0],):
            raise ShapeError("b2 length must equal w2 rows")

    @property
    def input_len(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_size(self) -> int:
        return self.w1.shape[0]

    @property
    def output_len(self) -> int:
        return self.w2.shape[0]

    @classmethod
    def zeros(cls, input_len, hidden_size, output_len):
        return cls(
            np.zeros((hidden_size, input_len)),
            np.zeros(hidden_size),
            np.zeros((output_len, hidden_size)),
            np.zeros(output_len),
        )


@dataclass(eq=False)
class LstmParams(_ParamsMixin):
    """Single-layer LSTM cell plus a linear readout of the last hidden state.

    Gate blocks are stacked in the order input, forget, candidate, output
    along the first axis of ``w_ih``, ``w_hh`` and ``b``.
    """

    w_ih: np.ndarray
    w_hh: np.ndarray
    b: np.ndarray
    w_out: np.ndarray
    b_out: np.ndarray

    def __post_init__(self):
        h = np.shape(self.w_hh)[1]
        if np.shape(self.w_hh) != (4 * h, h) or np.shape(self.w_ih) != (4 * h, 1):
            raise ShapeError("LSTM gate matrices must be (4H, 1) and (4H, H)")
        if np.shape(self.b) != (4 * h,) or np.shape(self.w_out) != (1, h):
            raise ShapeError("LSTM bias or readout shape mismatch")
        if np.shape(self.b_out) != (1,):
            raise ShapeError("LSTM readout bias must have length 1")

    @property
    def hidden_size(self) -> int:
        return self.w_hh.shape[1]

    @classmethod
    def zeros(cls, hidden_size):
        h = hidden_size
        return cls(np.zeros((4 * h, 1)), np.zeros((4 * h, h)), np.zeros(4 * h),
                   np.zeros((1, h)), np.zeros(1))


def _check_dims(**dims):
    for name, value in dims.items():
        if int(value) != value or value < 1:
            raise ShapeError(f"{name} must be a positive integer, got {value!r}")


def _glorot(rng: np.random.Generator, fan_out: int, fan_in: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_out, fan_in))


def init_params(seed: int, input_len: int, hidden_size: int = DEFAULT_HIDDEN,
                output_len: int = 1) -> MlpParams:
    """Glorot-uniform weights and zero biases from a PCG64 stream seeded by ``seed``."""
    _check_dims(input_len=input_len, hidden_size=hidden_size, output_len=output_len)
    rng = np.random.Generator(np.random.PCG64(seed))
    w1 = _glorot(rng, hidden_size, input_len)
    w2 = _glorot(rng, output_len, hidden_size)
    return MlpParams(w1, np.zeros(hidden_size), w2, np.zeros(output_len))


def init_lstm_params(seed: int, hidden_size: int = DEFAULT_HIDDEN) -> LstmParams:
    _check_dims(hidden_size=hidden_size)
    rng = np.random.Generator(np.random.PCG64(seed))
    h = hidden_size
    # each gate block gets its own Glorot bound
    w_ih = np.vstack([_glorot(rng, h, 1) for _ in range(4)])
    w_hh = np.vstack([_glorot(rng, h, h) for _ in range(4)])
    w_out = _glorot(rng, 1, h)
    return LstmParams(w_ih, w_hh, np.zeros(4 * h), w_out, np.zeros(1))


def mlp_graph(p: dict[str, T.Node], x) -> T.Node:
    """Record the MLP forward pass on the tape owning the parameter leaves."""
    hidden = T.sigmoid(T.add(T.matmul(x, p["w1"]), p["b1"]))
    return T.add(T.matmul(hidden, p["w2"]), p["b2"])


def check_input(x, length: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if length is not None and (x.ndim == 0 or x.shape[-1] != length):
        raise ShapeError(f"expected input length {length}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InputError("input contains non-finite values")
    return x


def mlp_forward(params: MlpParams, x, tape: T.Tape | None = None):
    """Evaluate the MLP on one input vector or a batch of rows.

    With ``tape`` given, the computation is recorded and the output
    :class:`~taylornet.numcore.tape.Node` is returned instead of an array.
    """
    x = check_input(x, params.input_len)
    if tape is not None:
        return mlp_graph(params.leaves(tape), x)
    hidden = T.stable_sigmoid(x @ params.w1.T + params.b1)
    return hidden @ params.w2.T + params.b2
