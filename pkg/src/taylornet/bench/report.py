"""CSV and markdown output for grid records and aggregate reports."""
from __future__ import annotations

import csv
import io
import math
import os
from pathlib import Path

from ..models import ModelKind
from .aggregate import AggregateReport
from .grid import STATUS_OK, RunRecord

RECORD_COLUMNS = ("dataset", "model", "learning_rate", "input_len", "seed", "substeps",
                  "status", "epochs_run", "train_mse", "val_mse", "test_mse", "note")


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return ""
    return repr(float(x))


def records_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORD_COLUMNS)
    for r in records:
        w.writerow([r.dataset, r.model.value, _fmt(r.learning_rate), r.input_len, r.seed,
                    r.substeps, r.status, r.epochs_run, _fmt(r.train_mse), _fmt(r.val_mse),
                    _fmt(r.test_mse), r.note])
    return buf.getvalue()


def _float(text, default=math.nan) -> float:
    text = (text or "").strip()
    return float(text) if text else default


def read_records(path) -> list[RunRecord]:
    """Parse a records file; only ``dataset``, ``model`` and ``test_mse`` are required."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"dataset", "model", "test_mse"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        out = []
        for row in reader:
            out.append(RunRecord(
                dataset=row["dataset"].strip(),
                model=ModelKind.parse(row["model"]),
                learning_rate=_float(row.get("learning_rate")),
                input_len=int(_float(row.get("input_len"), 0)),
                seed=int(_float(row.get("seed"), 0)),
                substeps=int(_float(row.get("substeps"), 1)),
                epochs_run=int(_float(row.get("epochs_run"), 0)),
                train_mse=_float(row.get("train_mse")),
                val_mse=_float(row.get("val_mse")),
                test_mse=_float(row.get("test_mse")),
                status=(row.get("status") or STATUS_OK).strip(),
                note=row.get("note") or "",
            ))
    return out


def best_table_csv(report: AggregateReport) -> str:
    t = report.table
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dataset"] + [m.value for m in t.models])
    for d, row in zip(t.datasets, t.values):
        w.writerow([d] + [_fmt(v) for v in row])
    w.writerow(["average_rank"] + [_fmt(report.avg_rank[m]) for m in t.models])
    w.writerow(["median_percent_deviation"] + [_fmt(report.median_pct_dev[m]) for m in t.models])
    return buf.getvalue()


def summary_markdown(report: AggregateReport, n_records: int | None = None) -> str:
    t = report.table
    lines = ["# Benchmark summary", ""]
    if n_records is not None:
        lines += [f"{n_records} grid records; best test MSE per dataset and model.",
                  "Per-dataset winners are in bold.", ""]
    lines.append("| dataset | " + " | ".join(m.label for m in t.models) + " |")
    lines.append("|---" * (len(t.models) + 1) + "|")
    for d, row in zip(t.datasets, t.values):
        cells = []
        for m, v in zip(t.models, row):
            text = "n/a" if math.isnan(v) else f"{v:.6g}"
            cells.append(f"**{text}**" if m in report.winners.get(d, []) else text)
        lines.append(f"| {d} | " + " | ".join(cells) + " |")

    def agg_row(label, values, digits):
        return f"| {label} | " + " | ".join(
            "n/a" if math.isnan(values[m]) else f"{values[m]:.{digits}f}" for m in t.models) + " |"

    lines.append(agg_row("Average Rank", report.avg_rank, 2))
    lines.append(agg_row("Median Percent Deviation", report.median_pct_dev, 1))
    return "\n".join(lines) + "\n"


def _write(path: Path, text: str):
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def emit_report(records, report: AggregateReport, output_dir, write_records: bool = True):
    """Write records.csv, best_table.csv and summary.md; returns the paths written.

    All content is rendered before touching the disk, and the directory is
    checked for writability up front.
    """
    out = Path(output_dir)
    texts = {}
    if write_records:
        texts["records.csv"] = records_csv(records)
    texts["best_table.csv"] = best_table_csv(report)
    texts["summary.md"] = summary_markdown(report, len(records))
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"output directory {out} is not writable")
    paths = []
    for name, text in texts.items():
        _write(out / name, text)
        paths.append(out / name)
    return paths
