"""Batched inference, metric reports and the persistence baseline."""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from . import tensor as tn
from .data import WindowSet, make_batches
from .errors import ContractError
from .metrics import all_metrics
from .model import EXPERTS, STaTModel, WindowFeatures, make_batch

METRIC_COLUMNS = ("dataset", "horizon", "mse", "mae", "dtw", "tdi")


@dataclass
class Forecast:
    """Stacked predictions of one model over a window set."""

    y_hat: np.ndarray                  # (S, T, C)
    y: np.ndarray                      # (S, T, C)
    weights: np.ndarray                # (S, T, C, 3) in EXPERTS order, zeros for absent experts
    origins: np.ndarray                # (S,)

    def __len__(self) -> int:
        return len(self.y)


def predict(model: STaTModel, windows: WindowSet, feats: WindowFeatures, batch_size: int = 64) -> Forecast:
    """Forward every window with the memory bank frozen."""
    bank = model.bank
    was_frozen = bank.frozen
    bank.frozen = True
    preds, targets, weights, origins = [], [], [], []
    try:
        with tn.no_grad():
            for idx in make_batches(len(windows), batch_size):
                batch = make_batch(windows, feats, idx)
                out = model(batch, update_bank=False)
                preds.append(out.y_hat.data)
                targets.append(batch.y)
                w = np.zeros(out.weights.shape[:-1] + (len(EXPERTS),))
                for j, name in enumerate(out.experts):
                    w[..., EXPERTS.index(name)] = out.weights.data[..., j]
                weights.append(w)
                origins.append(batch.origins)
    finally:
        bank.frozen = was_frozen
    return Forecast(np.concatenate(preds), np.concatenate(targets), np.concatenate(weights),
                    np.concatenate(origins))


def persistence_forecast(windows: WindowSet) -> Forecast:
    """Repeat the last observed value of every channel over the horizon."""
    x, y = windows.arrays()
    y_hat = np.repeat(x[:, -1:, :], y.shape[1], axis=1)
    w = np.zeros(y.shape + (len(EXPERTS),))
    w[..., 0] = 1.0
    return Forecast(y_hat, y, w, windows.origins)


@dataclass
class MetricRow:
    dataset: str
    horizon: str
    mse: float
    mae: float
    dtw: float
    tdi: float

    def values(self) -> tuple[float, float, float, float]:
        return self.mse, self.mae, self.dtw, self.tdi


@dataclass
class MetricReport:
    """Rows per horizon followed by an ``Avg`` row."""

    rows: list[MetricRow] = field(default_factory=list)

    @classmethod
    def from_rows(cls, rows: list[MetricRow]) -> MetricReport:
        rows = [r for r in rows if r.horizon != "Avg"]
        if not rows:
            raise ContractError("a report needs at least one horizon row")
        avg = np.mean([r.values() for r in rows], axis=0)
        return cls(rows + [MetricRow(rows[0].dataset, "Avg", *map(float, avg))])

    def row(self, horizon) -> MetricRow:
        for r in self.rows:
            if r.horizon == str(horizon):
                return r
        raise KeyError(horizon)

    @property
    def avg(self) -> MetricRow:
        return self.row("Avg")

    def to_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(METRIC_COLUMNS)
            for r in self.rows:
                w.writerow([r.dataset, r.horizon, *(f"{v:.6f}" for v in r.values())])

    def as_text(self) -> str:
        lines = [f"{'dataset':<14}{'horizon':>8}{'MSE':>10}{'MAE':>10}{'DTW':>10}{'TDI':>10}"]
        for r in self.rows:
            lines.append(f"{r.dataset:<14}{r.horizon:>8}" + "".join(f"{v:>10.4f}" for v in r.values()))
        return "\n".join(lines)


def forecast_metrics(forecast: Forecast) -> dict[str, float]:
    return all_metrics(forecast.y_hat, forecast.y)


def report_for(forecast: Forecast, dataset: str) -> MetricReport:
    m = forecast_metrics(forecast)
    T = forecast.y.shape[1]
    return MetricReport.from_rows([MetricRow(dataset, str(T), m["mse"], m["mae"], m["dtw"], m["tdi"])])


def evaluate(model: STaTModel, windows: WindowSet, feats: WindowFeatures, dataset: str = "",
             batch_size: int = 64) -> MetricReport:
    """Metrics in normalised space; DTW and TDI are per (sample, channel) means."""
    return report_for(predict(model, windows, feats, batch_size), dataset or windows.name)
