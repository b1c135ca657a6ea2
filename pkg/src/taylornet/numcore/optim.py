"""Adam with bias correction."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, ShapeError


@dataclass
class AdamState:
    first_moment: dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: dict[str, np.ndarray] = field(default_factory=dict)
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_params(cls, params, **hyper):
        arrays = params.as_dict() if hasattr(params, "as_dict") else params
        return cls({k: np.zeros_like(v) for k, v in arrays.items()},
                   {k: np.zeros_like(v) for k, v in arrays.items()}, 0, **hyper)


def adam_step(params, grads: dict[str, np.ndarray], state: AdamState, lr: float):
    """One Adam update; returns ``(new_params, new_state)`` without mutating inputs.

    ``params`` is an ``MlpParams``/``LstmParams`` or a plain dict of arrays; the
    result has the same type.
    """
    if not lr > 0:
        raise ConfigurationError(f"learning rate must be positive, got {lr}")
    as_obj = hasattr(params, "as_dict")
    arrays = params.as_dict() if as_obj else params
    if set(grads) != set(arrays):
        raise ShapeError(f"gradient keys {sorted(grads)} != parameter keys {sorted(arrays)}")

    t = state.step_count + 1
    b1, b2, eps = state.beta1, state.beta2, state.epsilon
    bc1 = 1.0 - b1 ** t
    bc2 = 1.0 - b2 ** t
    new, m_new, v_new = {}, {}, {}
    for k, w in arrays.items():
        g = np.asarray(grads[k], dtype=np.float64)
        if g.shape != w.shape:
            raise ShapeError(f"gradient for {k!r} has shape {g.shape}, expected {w.shape}")
        m = state.first_moment.get(k, np.zeros_like(w))
        v = state.second_moment.get(k, np.zeros_like(w))
        m_new[k] = b1 * m + (1.0 - b1) * g
        v_new[k] = b2 * v + (1.0 - b2) * (g * g)
        new[k] = w - lr * (m_new[k] / bc1) / (np.sqrt(v_new[k] / bc2) + eps)

    new_state = AdamState(m_new, v_new, t, b1, b2, eps)
    return (type(params).from_dict(new) if as_obj else new), new_state
