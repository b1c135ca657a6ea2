"""Synthetic series with closed-form derivatives, and the head-vs-derivative probe."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import ScalingParams, TimeSeries, apply_scaler, make_windows
from .errors import ConfigurationError, InputError
from .models import ModelKind, ModelSpec
from .numcore import mlp_forward

FAMILIES = ("ramp", "sine", "exponential", "logistic")


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of one synthetic series.

    Only the fields relevant to ``family`` are used:
    ramp ``intercept + slope*t``; sine ``amplitude*sin(omega*t)``;
    exponential ``x0*exp(rate*t)``; logistic with ``rate``, ``capacity``, ``x0``.
    """

    family: str
    n: int
    sample_interval: float = 1.0
    noise_std: float = 0.0
    seed: int = 0
    slope: float = 1.0
    intercept: float = 0.0
    omega: float = 1.0
    amplitude: float = 1.0
    rate: float = 0.1
    x0: float = 1.0
    capacity: float = 10.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if int(self.n) != self.n or self.n < 2:
            raise ConfigurationError(f"n must be an integer >= 2, got {self.n}")
        if not (self.sample_interval > 0 and math.isfinite(self.sample_interval)):
            raise ConfigurationError("sample_interval must be finite and positive")
        if not (self.noise_std >= 0 and math.isfinite(self.noise_std)):
            raise ConfigurationError("noise_std must be finite and >= 0")
        numbers = (self.slope, self.intercept, self.omega, self.amplitude,
                   self.rate, self.x0, self.capacity)
        if not all(math.isfinite(v) for v in numbers):
            raise ConfigurationError("family parameters must be finite")
        if self.family == "logistic":
            if self.capacity <= 0:
                raise ConfigurationError("logistic capacity must be positive")
            if not 0 < self.x0:
                raise ConfigurationError("logistic x0 must be positive")


@dataclass
class SyntheticSeries(TimeSeries):
    """A series plus noise-free derivatives: column k-1 holds the order-k derivative."""

    times: np.ndarray = field(default=None)
    derivatives: np.ndarray = field(default=None)
    sample_interval: float = 1.0


def closed_form(spec: SyntheticSpec, t) -> tuple[np.ndarray, np.ndarray]:
    """Noise-free value and first three derivatives at times ``t``."""
    t = np.asarray(t, dtype=np.float64)
    if spec.family == "ramp":
        f = spec.intercept + spec.slope * t
        d = [np.full_like(t, spec.slope), np.zeros_like(t), np.zeros_like(t)]
    elif spec.family == "sine":
        a, w = spec.amplitude, spec.omega
        f = a * np.sin(w * t)
        d = [a * w * np.cos(w * t), -a * w ** 2 * np.sin(w * t), -a * w ** 3 * np.cos(w * t)]
    elif spec.family == "exponential":
        f = spec.x0 * np.exp(spec.rate * t)
        d = [spec.rate ** k * f for k in (1, 2, 3)]
    else:
        r, K, x0 = spec.rate, spec.capacity, spec.x0
        f = K / (1.0 + (K - x0) / x0 * np.exp(-r * t))
        # logistic ODE x' = r x (1 - x/K), differentiated twice more
        d1 = r * f * (1.0 - f / K)
        d2 = r * d1 * (1.0 - 2.0 * f / K)
        d3 = r * (d2 * (1.0 - 2.0 * f / K) - 2.0 * d1 ** 2 / K)
        d = [d1, d2, d3]
    return f, np.stack(d, axis=-1)


def generate(spec: SyntheticSpec, name: str | None = None) -> SyntheticSeries:
    times = np.arange(spec.n) * spec.sample_interval
    values, derivs = closed_form(spec, times)
    if spec.noise_std > 0:
        rng = np.random.Generator(np.random.PCG64(spec.seed))
        values = values + rng.normal(0.0, spec.noise_std, size=values.shape)
    if not np.all(np.isfinite(values)):
        raise ConfigurationError(f"{spec.family} series overflows for the given parameters")
    return SyntheticSeries(name or spec.family, values, times=times, derivatives=derivs,
                           sample_interval=spec.sample_interval)


# -- probe ---------------------------------------------------------------------

@dataclass
class OrderStats:
    order: int
    rmse: float
    correlation: float | None
    note: str = ""

    @property
    def correlation_text(self) -> str:
        return self.note if self.correlation is None else repr(self.correlation)


@dataclass
class ProbeReport:
    orders: list[OrderStats]
    n_samples: int


def _is_constant(x: np.ndarray) -> bool:
    return float(np.ptp(x)) <= 1e-12 * max(1.0, float(np.max(np.abs(x))))


def compare_heads(heads: np.ndarray, truth: np.ndarray) -> ProbeReport:
    """Per-order RMSE and Pearson correlation of head outputs against analytic derivatives."""
    heads = np.atleast_2d(np.asarray(heads, dtype=np.float64))
    truth = np.atleast_2d(np.asarray(truth, dtype=np.float64))
    if heads.shape != truth.shape:
        raise ValueError(f"heads {heads.shape} and truth {truth.shape} differ in shape")
    stats = []
    for k in range(heads.shape[1]):
        h, d = heads[:, k], truth[:, k]
        rmse = float(np.sqrt(np.mean((h - d) ** 2)))
        ch, cd = _is_constant(h), _is_constant(d)
        if ch or cd:
            what = "both" if ch and cd else ("head" if ch else "derivative")
            stats.append(OrderStats(k + 1, rmse, None, f"undefined ({what} constant)"))
        else:
            r = float(np.clip(np.corrcoef(h, d)[0, 1], -1.0, 1.0))
            stats.append(OrderStats(k + 1, rmse, r))
    return ProbeReport(stats, heads.shape[0])


def network_heads(params, spec: ModelSpec, windows: np.ndarray) -> np.ndarray:
    """Head outputs per window; for recursive kinds, the last element's component."""
    if not spec.kind.uses_skip:
        raise ConfigurationError(f"{spec.kind.value} has no derivative heads to probe")
    out = np.atleast_2d(mlp_forward(params, windows))
    if spec.kind.is_recursive:
        L = spec.input_len
        return np.stack([out[:, k * L + L - 1] for k in range(spec.taylor_order)], axis=1)
    return out[:, : spec.taylor_order]


def derivative_probe(params, spec: ModelSpec, series: SyntheticSeries,
                     scaling: ScalingParams | None = None, head_fn=None) -> ProbeReport:
    """Compare heads with analytic derivatives at each window's final timestamp.

    Values are windowed after applying ``scaling``; analytic derivatives are
    converted to the same units: divided by the scaling range and multiplied
    by ``(sample_interval / spec.delta_t) ** k`` for order k.

    ``head_fn(windows, end_times)`` replaces the network when given; it must
    return a ``(count, order)`` array.
    """
    derivs = getattr(series, "derivatives", None)
    if derivs is None:
        raise InputError("series carries no analytic derivative annotations")
    if spec.kind is ModelKind.DIRECT or spec.kind is ModelKind.LSTM:
        raise ConfigurationError(f"{spec.kind.value} has no derivative heads to probe")
    values = series.values if scaling is None else apply_scaler(scaling, series.values)
    ws = make_windows(values, spec.input_len)
    end = np.arange(len(ws)) + spec.input_len - 1
    order = spec.taylor_order

    span = 1.0 if scaling is None or scaling.degenerate else scaling.range
    ratio = series.sample_interval / spec.delta_t
    truth = np.stack([derivs[end, k] * ratio ** (k + 1) / span for k in range(order)], axis=1)

    if head_fn is not None:
        heads = np.asarray(head_fn(ws.inputs, series.times[end]), dtype=np.float64)
    else:
        heads = network_heads(params, spec, ws.inputs)
    return compare_heads(heads.reshape(len(ws), order), truth)
