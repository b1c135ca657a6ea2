"""Tape-based reverse-mode automatic differentiation.

Every primitive appends a :class:`Node` to the tape that created its operands,
so the node list is topologically ordered by construction.  :func:`backward`
walks it in reverse, accumulating vector-Jacobian products.

Nodes overload ``+``, ``-``, ``*`` and basic indexing, which lets the same
numerical code run on plain arrays or on recorded graphs.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import ShapeError

__all__ = [
    "Node",
    "Tape",
    "backward",
    "matmul",
    "add",
    "mul",
    "scale",
    "sigmoid",
    "tanh",
    "concat",
    "take",
    "mse",
    "stable_sigmoid",
]


def stable_sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


class Node:
    """One recorded value on a tape."""

    __slots__ = ("tape", "value", "op", "parents", "vjp", "name", "index")

    # make numpy defer to our reflected operators
    __array_ufunc__ = None

    def __init__(self, tape, value, op, parents=(), vjp=None, name=None):
        self.tape = tape
        self.value = value
        self.op = op
        self.parents = tuple(parents)
        self.vjp = vjp
        self.name = name
        self.index = len(tape.nodes)
        tape.nodes.append(self)

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        return f"Node(op={self.op!r}, shape={self.value.shape})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, _neg(other, self.tape))

    def __rsub__(self, other):
        return add(other, scale(self, -1.0))

    def __neg__(self):
        return scale(self, -1.0)

    def __mul__(self, other):
        if np.isscalar(other):
            return scale(self, float(other))
        return mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __getitem__(self, index):
        return take(self, index)


class Tape:
    """Ordered record of primitive operations."""

    def __init__(self):
        self.nodes: list[Node] = []

    def __len__(self):
        return len(self.nodes)

    def leaf(self, value, name: str | None = None) -> Node:
        """A differentiable input; named leaves are reported by :func:`backward`."""
        return Node(self, np.array(value, dtype=np.float64), "leaf", name=name)

    def constant(self, value) -> Node:
        return Node(self, np.asarray(value, dtype=np.float64), "const")

    def reset(self):
        self.nodes.clear()


def _tape_of(*operands) -> Tape:
    for x in operands:
        if isinstance(x, Node):
            return x.tape
    raise TypeError("at least one operand must be a Node")


def _lift(x, tape: Tape) -> Node:
    if isinstance(x, Node):
        if x.tape is not tape:
            raise ValueError("operands belong to different tapes")
        return x
    return tape.constant(x)


def _neg(x, tape):
    if isinstance(x, Node):
        return scale(x, -1.0)
    return _lift(-np.asarray(x, dtype=np.float64), tape)


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def matmul(x, w) -> Node:
    """``x @ w.T``: a matrix-vector product per row of ``x``.

    ``w`` has shape (out, in); ``x`` is (in,) or (batch, in).
    """
    tape = _tape_of(x, w)
    x, w = _lift(x, tape), _lift(w, tape)
    if w.value.ndim != 2 or x.value.shape[-1] != w.value.shape[1]:
        raise ShapeError(
            f"cannot multiply input of shape {x.value.shape} by weights {w.value.shape}"
        )
    xv, wv = x.value, w.value

    def vjp(g):
        gx = g @ wv
        gw = np.outer(g, xv) if xv.ndim == 1 else g.T @ xv
        return gx, gw

    return Node(tape, xv @ wv.T, "matmul", (x, w), vjp)


def add(a, b) -> Node:
    tape = _tape_of(a, b)
    a, b = _lift(a, tape), _lift(b, tape)
    sa, sb = a.value.shape, b.value.shape
    try:
        value = a.value + b.value
    except ValueError as exc:
        raise ShapeError(f"cannot add shapes {sa} and {sb}") from exc

    def vjp(g):
        return _unbroadcast(g, sa), _unbroadcast(g, sb)

    return Node(tape, value, "add", (a, b), vjp)


def mul(a, b) -> Node:
    """Elementwise product with broadcasting."""
    tape = _tape_of(a, b)
    a, b = _lift(a, tape), _lift(b, tape)
    av, bv = a.value, b.value
    try:
        value = av * bv
    except ValueError as exc:
        raise ShapeError(f"cannot multiply shapes {av.shape} and {bv.shape}") from exc

    def vjp(g):
        return _unbroadcast(g * bv, av.shape), _unbroadcast(g * av, bv.shape)

    return Node(tape, value, "mul", (a, b), vjp)


def scale(a: Node, c: float) -> Node:
    c = float(c)
    return Node(a.tape, c * a.value, "scale", (a,), lambda g: (c * g,))


def sigmoid(a: Node) -> Node:
    s = stable_sigmoid(a.value)
    return Node(a.tape, s, "sigmoid", (a,), lambda g: (g * s * (1.0 - s),))


def tanh(a: Node) -> Node:
    t = np.tanh(a.value)
    return Node(a.tape, t, "tanh", (a,), lambda g: (g * (1.0 - t * t),))


def take(a: Node, index) -> Node:
    """Basic (non-fancy) indexing, e.g. a column slice."""
    value = a.value[index]
    shape = a.value.shape

    def vjp(g):
        out = np.zeros(shape)
        out[index] = g
        return (out,)

    return Node(a.tape, np.array(value, dtype=np.float64), "slice", (a,), vjp)


def concat(parts: Sequence[Node], axis: int = -1) -> Node:
    tape = _tape_of(*parts)
    parts = [_lift(p, tape) for p in parts]
    values = [p.value for p in parts]
    try:
        value = np.concatenate(values, axis=axis)
    except ValueError as exc:
        raise ShapeError(str(exc)) from exc
    bounds = np.cumsum([v.shape[axis] for v in values])[:-1]

    def vjp(g):
        return tuple(np.split(g, bounds, axis=axis))

    return Node(tape, value, "concat", parts, vjp)


def mse(pred: Node, target) -> Node:
    """Mean squared error reduction to a scalar node."""
    tape = pred.tape
    tv = np.asarray(target.value if isinstance(target, Node) else target, dtype=np.float64)
    if tv.shape != pred.value.shape:
        raise ShapeError(f"prediction shape {pred.value.shape} != target shape {tv.shape}")
    diff = pred.value - tv
    n = diff.size

    def vjp(g):
        return (g * 2.0 * diff / n,)

    return Node(tape, np.array(np.mean(diff * diff)), "mse", (pred,), vjp)


def backward(tape: Tape, loss: Node) -> dict[str, np.ndarray]:
    """Reverse pass from a scalar ``loss``.

    Returns the gradient for every named leaf (zeros when the loss does not
    depend on it).  The tape is reset afterwards.
    """
    if loss.tape is not tape:
        raise ValueError("loss node is not on this tape")
    if loss.value.size != 1:
        raise ShapeError(f"loss must be scalar, got shape {loss.value.shape}")

    grads: dict[int, np.ndarray] = {loss.index: np.ones_like(loss.value)}
    for node in reversed(tape.nodes[: loss.index + 1]):
        g = grads.pop(node.index, None) if node.vjp is not None else grads.get(node.index)
        if g is None or node.vjp is None:
            continue
        for parent, pg in zip(node.parents, node.vjp(g)):
            if parent.op == "const":
                continue
            if parent.index in grads:
                grads[parent.index] = grads[parent.index] + pg
            else:
                grads[parent.index] = pg

    result = {}
    for node in tape.nodes:
        if node.op == "leaf" and node.name is not None:
            result[node.name] = grads.get(node.index, np.zeros_like(node.value))
    tape.reset()
    return result

