"""Best-cell selection and the cross-dataset ranking metrics."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..models import ModelKind


@dataclass
class BestTable:
    """Minimum finite test error per (dataset, model); NaN marks a missing cell."""

    datasets: list[str]
    models: list[ModelKind]
    values: np.ndarray

    def get(self, dataset, model) -> float:
        return float(self.values[self.datasets.index(dataset), self.models.index(ModelKind.parse(model))])

    def complete_rows(self, purpose: str) -> np.ndarray:
        mask = ~np.isnan(self.values).any(axis=1)
        for i in np.flatnonzero(~mask):
            missing = [m.value for m, v in zip(self.models, self.values[i]) if math.isnan(v)]
            warnings.warn(f"{purpose}: excluding dataset {self.datasets[i]!r}; "
                          f"no finite result for {missing}", stacklevel=3)
        return mask


@dataclass
class AggregateReport:
    table: BestTable
    avg_rank: dict
    median_pct_dev: dict
    winners: dict


def best_per_cell(records) -> BestTable:
    best: dict[tuple, float] = {}
    datasets, models = [], set()
    for r in records:
        model = ModelKind.parse(r.model)
        if r.dataset not in datasets:
            datasets.append(r.dataset)
        models.add(model)
        key = (r.dataset, model)
        best.setdefault(key, math.nan)
        if math.isfinite(r.test_mse) and (math.isnan(best[key]) or r.test_mse < best[key]):
            best[key] = r.test_mse
    datasets = sorted(datasets)
    models = sorted(models, key=lambda m: m.rank)
    values = np.full((len(datasets), len(models)), np.nan)
    for (d, m), v in best.items():
        values[datasets.index(d), models.index(m)] = v
    for d, m in zip(*np.nonzero(np.isnan(values))):
        warnings.warn(f"no finite result for dataset {datasets[d]!r}, model {models[m].value!r}",
                      stacklevel=2)
    return BestTable(datasets, models, values)


def tie_ranks(row) -> np.ndarray:
    """Ascending ranks from 1; tied values share the mean of their positions."""
    row = np.asarray(row, dtype=np.float64)
    order = np.argsort(row, kind="stable")
    ranks = np.empty(row.size)
    i = 0
    while i < row.size:
        j = i
        while j + 1 < row.size and row[order[j + 1]] == row[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def average_rank(table: BestTable) -> dict:
    rows = table.values[table.complete_rows("average rank")]
    if rows.shape[0] == 0:
        return {m: math.nan for m in table.models}
    ranks = np.array([tie_ranks(r) for r in rows])
    return dict(zip(table.models, ranks.mean(axis=0).tolist()))


def median_percent_deviation(table: BestTable) -> dict:
    rows = table.values[table.complete_rows("median percent deviation")]
    best = rows.min(axis=1) if rows.size else np.empty(0)
    zero = best <= 0
    if zero.any():
        warnings.warn(f"median percent deviation: excluding {int(zero.sum())} dataset(s) "
                      "whose best error is 0", stacklevel=2)
    rows, best = rows[~zero], best[~zero]
    if rows.shape[0] == 0:
        return {m: math.nan for m in table.models}
    dev = 100.0 * (rows - best[:, None]) / best[:, None]
    return dict(zip(table.models, np.median(dev, axis=0).tolist()))


def winners(table: BestTable) -> dict:
    """Every model attaining a dataset's minimum (more than one on exact ties)."""
    out = {}
    for d, row in zip(table.datasets, table.values):
        if np.isnan(row).all():
            out[d] = []
            continue
        low = np.nanmin(row)
        out[d] = [m for m, v in zip(table.models, row) if v == low]
    return out


def aggregate(records) -> AggregateReport:
    table = best_per_cell(records)
    return AggregateReport(table, average_rank(table), median_percent_deviation(table),
                           winners(table))
