"""Grid search, aggregation metrics, report emission and probe runs."""
from .aggregate import (
    AggregateReport,
    BestTable,
    aggregate,
    average_rank,
    best_per_cell,
    median_percent_deviation,
    tie_ranks,
    winners,
)
from .grid import RunRecord, grid_cells, persistence_mse, run_grid
from .manifest import (
    DatasetEntry,
    ProbeConfig,
    RunManifest,
    load_manifest,
    load_probe_manifest,
)
from .probe import run_probe, write_probe_report
from .report import emit_report, read_records, records_csv, summary_markdown

__all__ = [
    "AggregateReport",
    "BestTable",
    "DatasetEntry",
    "ProbeConfig",
    "RunManifest",
    "RunRecord",
    "aggregate",
    "average_rank",
    "best_per_cell",
    "emit_report",
    "grid_cells",
    "load_manifest",
    "load_probe_manifest",
    "median_percent_deviation",
    "persistence_mse",
    "read_records",
    "records_csv",
    "run_grid",
    "run_probe",
    "summary_markdown",
    "tie_ranks",
    "winners",
    "write_probe_report",
]
