"""Train on a synthetic series and compare the learned heads with true derivatives."""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from ..data import apply_scaler, fit_scaler, make_windows, split_series
from ..models import ModelSpec
from ..synth import SyntheticSeries, derivative_probe, generate
from ..train import TrainConfig, train_model
from .manifest import ProbeConfig

PROBE_COLUMNS = ("probe", "family", "model", "order", "rmse", "correlation",
                 "n_samples", "train_mse", "test_mse")


def run_probe(cfg: ProbeConfig) -> list[dict]:
    """One probe: train on the train/val segments, probe on the test segment."""
    series = generate(cfg.synthetic, name=cfg.name)
    parts = split_series(series, cfg.split)
    scaler = fit_scaler(parts[0])
    train, val, test = (make_windows(apply_scaler(scaler, p.values), cfg.input_len) for p in parts)
    m = cfg.substeps if cfg.model.is_recursive else 1
    spec = ModelSpec(cfg.model, cfg.input_len, cfg.hidden_size, 1.0, m)
    config = TrainConfig(cfg.learning_rate, cfg.input_len, cfg.seed, m, cfg.max_epochs,
                         cfg.patience, cfg.batch_size)
    report = train_model(spec, train, val, config, test)

    # the test segment keeps its own slice of the analytic annotations
    lo = len(parts[0]) + len(parts[1])
    test_series = SyntheticSeries(f"{cfg.name}:test", parts[2].values,
                                  times=series.times[lo:], derivatives=series.derivatives[lo:],
                                  sample_interval=series.sample_interval)
    rows = []
    if report.diverged:
        return [dict(probe=cfg.name, family=cfg.synthetic.family, model=cfg.model.value,
                     order=k, rmse=math.inf, correlation="diverged", n_samples=0,
                     train_mse=math.inf, test_mse=math.inf)
                for k in range(1, spec.taylor_order + 1)]
    probe = derivative_probe(report.best_params, spec, test_series, scaler)
    for st in probe.orders:
        rows.append(dict(probe=cfg.name, family=cfg.synthetic.family, model=cfg.model.value,
                         order=st.order, rmse=st.rmse, correlation=st.correlation_text,
                         n_samples=probe.n_samples, train_mse=report.train_mse,
                         test_mse=report.test_mse))
    return rows


def probe_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, PROBE_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def write_probe_report(rows, output_dir) -> Path:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "probe_report.csv"
    path.write_text(probe_csv(rows))
    return path
