"""Linear algebra, reverse-mode autodiff, initialization and Adam."""
from .optim import AdamState, adam_step
from .params import (
    DEFAULT_HIDDEN,
    LstmParams,
    MlpParams,
    init_lstm_params,
    init_params,
    mlp_forward,
    mlp_graph,
)
from .tape import Node, Tape, backward

__all__ = [
    "AdamState",
    "DEFAULT_HIDDEN",
    "LstmParams",
    "MlpParams",
    "Node",
    "Tape",
    "adam_step",
    "backward",
    "init_lstm_params",
    "init_params",
    "mlp_forward",
    "mlp_graph",
]
