"""Run artefacts: metrics CSV, JSON manifest, per-window predictions and an SVG plot."""
from __future__ import annotations

import csv
import json
import os
import platform
from pathlib import Path

import numpy as np

from .config import RunConfig
from .evaluation import Forecast, MetricReport

PREDICTION_COLUMNS = ("origin", "step", "channel", "y", "y_hat", "w_temp", "w_txt", "w_sym")


def write_predictions(forecast: Forecast, path: str | os.PathLike) -> int:
    """One row per (window, step, channel); returns the row count."""
    S, T, C = forecast.y.shape
    origin = np.repeat(forecast.origins, T * C)
    step = np.tile(np.repeat(np.arange(T), C), S)
    channel = np.tile(np.arange(C), S * T)
    y = forecast.y.reshape(-1)
    y_hat = forecast.y_hat.reshape(-1)
    w = forecast.weights.reshape(-1, forecast.weights.shape[-1])
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(PREDICTION_COLUMNS)
        for i in range(len(y)):
            out.writerow([int(origin[i]), int(step[i]), int(channel[i]), f"{y[i]:.6g}", f"{y_hat[i]:.6g}",
                          f"{w[i, 0]:.8f}", f"{w[i, 1]:.8f}", f"{w[i, 2]:.8f}"])
    return len(y)


def plot_forecast(forecast: Forecast, path: str | os.PathLike, window: int = 0, channel: int = 0) -> None:
    """Target vs forecast on top, routing-weight traces below."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "tristat"
    steps = np.arange(forecast.y.shape[1])
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 5), sharex=True)
    ax1.plot(steps, forecast.y[window, :, channel], label="y", color="black")
    ax1.plot(steps, forecast.y_hat[window, :, channel], label="forecast", color="tab:red")
    ax1.set_ylabel("value (normalised)")
    ax1.legend(loc="upper right")
    for j, name in enumerate(("temporal", "textual", "symbolic")):
        ax2.plot(steps, forecast.weights[window, :, channel, j], label=name)
    ax2.set_ylim(0, 1)
    ax2.set_xlabel("horizon step")
    ax2.set_ylabel("routing weight")
    ax2.legend(loc="upper right")
    fig.suptitle(f"window origin {int(forecast.origins[window])}, channel {channel}")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def manifest(cfg: RunConfig, report: MetricReport, extra: dict | None = None) -> dict:
    out = {
        "seed": cfg.seed,
        "config_hash": cfg.config_hash(),
        "config": {k: list(v) if isinstance(v, tuple) else v for k, v in cfg.to_dict().items()},
        "metrics": [vars(r) for r in report.rows],
        "numpy": np.__version__,
        "python": platform.python_version(),
    }
    out.update(extra or {})
    return out


def emit_outputs(out_dir: str | os.PathLike, cfg: RunConfig, report: MetricReport,
                 forecast: Forecast | None = None, plot: bool = True,
                 extra: dict | None = None) -> dict[str, Path]:
    """Write the run's files into ``out_dir`` and return their paths by kind."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"metrics": out / "metrics.csv", "manifest": out / "manifest.json"}
    report.to_csv(paths["metrics"])
    paths["manifest"].write_text(json.dumps(manifest(cfg, report, extra), indent=2) + "\n")
    if forecast is not None:
        paths["predictions"] = out / "predictions.csv"
        write_predictions(forecast, paths["predictions"])
        if plot:
            paths["plot"] = out / "forecast.svg"
            plot_forecast(forecast, paths["plot"])
    return paths
