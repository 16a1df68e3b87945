"""Dynamic text prompts and the volatility descriptor of an input window."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HIGH_VOLATILITY = 1.2
LOW_VOLATILITY = 0.8


@dataclass(frozen=True)
class WindowStats:
    min: float
    max: float
    median: float
    trend: str
    momentum: str
    period: int


@dataclass(frozen=True)
class PromptDoc:
    text: str
    alpha: float
    stats: WindowStats


def volatility_descriptor(x: np.ndarray) -> float:
    """Mean over channels of the within-window standard deviation.

    ``x`` is an L x C window already normalised with training statistics.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return float(x.std(axis=0).mean())


def volatility_descriptors(x: np.ndarray) -> np.ndarray:
    """Vectorised ``volatility_descriptor`` over a batch (B, L, C)."""
    return np.asarray(x, dtype=float).std(axis=1).mean(axis=1)


def volatility_label(alpha: float) -> str:
    if alpha > HIGH_VOLATILITY:
        return "high"
    if alpha < LOW_VOLATILITY:
        return "low"
    return "moderate"


def _direction(value: float) -> str:
    return "upward" if value >= 0 else "downward"


def ols_slope(series: np.ndarray) -> float:
    t = np.arange(len(series), dtype=float)
    tc = t - t.mean()
    return float((tc * (series - series.mean())).sum() / (tc * tc).sum())


def dominant_period(series: np.ndarray) -> int:
    """Lag in [2, L/2] maximising the lagged Pearson autocorrelation.

    Near-ties (within 1e-9) resolve to the shortest lag, so a clean cycle
    reports its base period rather than a multiple.
    """
    s = np.asarray(series, dtype=float)
    n = len(s)
    lags = np.arange(2, max(2, n // 2) + 1)
    acf = np.full(len(lags), -np.inf)
    for i, lag in enumerate(lags):
        a, b = s[:-lag], s[lag:]
        a = a - a.mean()
        b = b - b.mean()
        denom = np.sqrt((a * a).sum() * (b * b).sum())
        if denom > 0:
            acf[i] = (a * b).sum() / denom
    if not np.isfinite(acf).any():
        return int(lags[0])
    return int(lags[np.flatnonzero(acf >= acf.max() - 1e-9)[0]])


def window_stats(x: np.ndarray) -> WindowStats:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    profile = x.mean(axis=1)
    q = max(1, len(profile) // 4)
    return WindowStats(
        min=float(x.min()),
        max=float(x.max()),
        median=float(np.median(x)),
        trend=_direction(ols_slope(profile)),
        momentum=_direction(float(profile[-q:].mean() - profile[:q].mean())),
        period=dominant_period(profile),
    )


TEMPLATE = (
    "[Task Specification] "
    "Dataset: {description} "
    "Task: Forecast the next {horizon} steps using the past {lookback} steps. "
    "[Dynamic Statistics] "
    "Input statistics: min value = {min:.3f}, max value = {max:.3f}, median value = {median:.3f}, "
    "overall trend is {trend}, recent momentum is {momentum}, "
    "periodicity is approximately {period} steps, "
    "Volatility descriptor alpha = {alpha:.3f} ({label})."
)


def render_prompt(x: np.ndarray, description: str, lookback: int, horizon: int) -> PromptDoc:
    """Fill the prompt template for one normalised L x C window."""
    stats = window_stats(x)
    alpha = volatility_descriptor(x)
    text = TEMPLATE.format(description=description.strip(), horizon=horizon, lookback=lookback,
                           min=stats.min, max=stats.max, median=stats.median, trend=stats.trend,
                           momentum=stats.momentum, period=stats.period, alpha=alpha,
                           label=volatility_label(alpha))
    return PromptDoc(text, alpha, stats)
