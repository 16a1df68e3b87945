"""Benchmark CSV loading, train/val/test splitting and sliding windows.

Splits follow the protocol used by the common long-horizon benchmark
loaders: ETT hourly data is cut at 12/4/4 months, ETT 15-minute data at
the same months in quarter-hours, and every other dataset 70/10/20 by
rows. Validation and test regions are prefixed with the last ``L`` rows
of the preceding region so their first window has a full look-back.
Normalisation uses per-channel statistics of the training region only.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import DataLoadError, SplitError

SPLIT_MODES = ("ett_hour", "ett_minute", "ratio_70_10_20")


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    csv_path: str
    channels: int
    frequency: str = ""
    split_mode: str = "ratio_70_10_20"
    description: str = ""
    rows: int | None = None          # known length of the published file, if any

    def __post_init__(self):
        if self.channels < 1:
            raise DataLoadError(f"{self.name}: channel count must be >= 1")
        if self.split_mode not in SPLIT_MODES:
            raise DataLoadError(f"{self.name}: unknown split mode {self.split_mode!r}")


def split_mode_for(name: str) -> str:
    low = name.lower()
    if low.startswith("etth"):
        return "ett_hour"
    if low.startswith("ettm"):
        return "ett_minute"
    return "ratio_70_10_20"


_ETT_DESC = ("Electricity Transformer Temperature data: oil temperature of a power "
             "transformer together with six power load features")

# name -> (file, channels, frequency, description, rows in the published file)
BENCHMARKS: dict[str, tuple[str, int, str, str, int]] = {
    "ETTh1": ("ETTh1.csv", 7, "1 hour", _ETT_DESC + ", recorded hourly.", 17420),
    "ETTh2": ("ETTh2.csv", 7, "1 hour", _ETT_DESC + ", recorded hourly at a second station.", 17420),
    "ETTm1": ("ETTm1.csv", 7, "15 min", _ETT_DESC + ", recorded every 15 minutes.", 69680),
    "ETTm2": ("ETTm2.csv", 7, "15 min", _ETT_DESC + ", recorded every 15 minutes at a second station.", 69680),
    "Weather": ("weather.csv", 21, "10 min",
                "Meteorological indicators such as air temperature, humidity and wind, recorded every 10 minutes.",
                52696),
    "Electricity": ("electricity.csv", 321, "1 hour",
                    "Hourly electricity consumption of 321 clients.", 26304),
    "Traffic": ("traffic.csv", 862, "1 hour",
                "Hourly road occupancy rates measured by 862 freeway sensors.", 17544),
    "Exchange": ("exchange_rate.csv", 8, "1 day",
                 "Daily exchange rates of eight national currencies against the US dollar.", 7588),
}

# published (train, val, test) window counts at L=96, T=96
PUBLISHED_COUNTS: dict[str, tuple[int, int, int]] = {
    "ETTh1": (8545, 2881, 2881),
    "ETTh2": (8545, 2881, 2881),
    "ETTm1": (34465, 11521, 11521),
    "ETTm2": (34465, 11521, 11521),
    "Weather": (36792, 5271, 10540),
    "Electricity": (18317, 2633, 5261),
    "Traffic": (12185, 1757, 3509),
    "Exchange": (5120, 665, 1422),
}


def data_dir() -> Path:
    return Path(os.environ.get("STAT_DATA_DIR", "data"))


def benchmark_spec(name: str, root: str | os.PathLike | None = None) -> DatasetSpec:
    if name not in BENCHMARKS:
        raise DataLoadError(f"unknown benchmark {name!r}; known: {sorted(BENCHMARKS)}")
    fname, ch, freq, desc, rows = BENCHMARKS[name]
    root = Path(root) if root is not None else data_dir()
    return DatasetSpec(name, str(root / fname), ch, freq, split_mode_for(name), desc, rows)


def load_registry(path: str | os.PathLike) -> dict[str, DatasetSpec]:
    """Read a registry CSV with columns name, path, split_mode, description[, channels, frequency]."""
    path = Path(path)
    if not path.exists():
        raise DataLoadError(f"registry file not found: {path}")
    out = {}
    with path.open(newline="") as fh:
        for rec in csv.DictReader(fh):
            csv_path = Path(rec["path"])
            if not csv_path.is_absolute():
                csv_path = path.parent / csv_path
            channels = int(rec.get("channels") or 0) or _count_csv_channels(csv_path)
            out[rec["name"]] = DatasetSpec(rec["name"], str(csv_path), channels, rec.get("frequency", ""),
                                           rec.get("split_mode") or split_mode_for(rec["name"]),
                                           rec.get("description", ""))
    return out


def _count_csv_channels(path: Path) -> int:
    if not path.exists():
        raise DataLoadError(f"dataset file not found: {path}")
    with path.open(newline="") as fh:
        header = next(csv.reader(fh), None)
    if not header:
        raise DataLoadError(f"{path}: empty file")
    return len(header) - 1


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------

def load_csv(spec: DatasetSpec) -> tuple[np.ndarray, list[str]]:
    """Return the numeric matrix (rows x C) and the timestamp column."""
    path = Path(spec.csv_path)
    if not path.exists():
        raise DataLoadError(f"dataset file not found: {path}")
    stamps: list[str] = []
    rows: list[list[float]] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataLoadError(f"{path}: empty file")
        if len(header) - 1 != spec.channels:
            raise DataLoadError(f"{path}: header has {len(header) - 1} value columns, "
                                f"expected {spec.channels}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) - 1 != spec.channels:
                raise DataLoadError(f"{path}:{lineno}: expected {spec.channels} values, got {len(rec) - 1}")
            try:
                vals = [float(v) for v in rec[1:]]
            except ValueError:
                raise DataLoadError(f"{path}:{lineno}: non-numeric value in {rec[1:]!r}") from None
            if any(math.isnan(v) for v in vals):
                raise DataLoadError(f"{path}:{lineno}: NaN value")
            stamps.append(rec[0])
            rows.append(vals)
    if not rows:
        raise DataLoadError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64), stamps


def write_csv(path: str | os.PathLike, values: np.ndarray, stamps: list[str] | None = None,
              names: list[str] | None = None) -> None:
    values = np.asarray(values)
    if stamps is None:
        stamps = [str(i) for i in range(len(values))]
    if names is None:
        names = [f"c{i}" for i in range(values.shape[1])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", *names])
        for stamp, row in zip(stamps, values):
            w.writerow([stamp, *(repr(float(v)) for v in row)])


# ---------------------------------------------------------------------------
# splitting and windows
# ---------------------------------------------------------------------------

def split_borders(n_rows: int, split_mode: str, lookback: int) -> tuple[list[int], list[int]]:
    """Row ranges [start, end) of the train, val and test regions."""
    if split_mode == "ett_hour":
        unit = 30 * 24
        b1, b2, b3 = 12 * unit, 16 * unit, 20 * unit
    elif split_mode == "ett_minute":
        unit = 30 * 24 * 4
        b1, b2, b3 = 12 * unit, 16 * unit, 20 * unit
    elif split_mode == "ratio_70_10_20":
        n_train = int(n_rows * 0.7)
        n_test = int(n_rows * 0.2)
        b1, b2, b3 = n_train, n_rows - n_test, n_rows
    else:
        raise SplitError(f"unknown split mode {split_mode!r}")
    if b3 > n_rows:
        raise SplitError(f"{split_mode} split needs {b3} rows, series has {n_rows}")
    starts = [0, b1 - lookback, b2 - lookback]
    ends = [b1, b2, b3]
    return starts, ends


def split_window_counts(n_rows: int, split_mode: str, lookback: int, horizon: int) -> tuple[int, int, int]:
    starts, ends = split_borders(n_rows, split_mode, lookback)
    return tuple(max(0, e - s - lookback - horizon + 1) for s, e in zip(starts, ends))


@dataclass
class SeriesWindow:
    x: np.ndarray              # L x C, normalised
    y: np.ndarray              # T x C, normalised
    norm_mean: np.ndarray
    norm_std: np.ndarray
    origin_index: int          # row of x[0] in the source series

    def denormalize(self) -> tuple[np.ndarray, np.ndarray]:
        return self.x * self.norm_std + self.norm_mean, self.y * self.norm_std + self.norm_mean


@dataclass
class WindowSet:
    """Windows over one contiguous normalised region, materialised lazily."""

    values: np.ndarray         # region rows x C (normalised)
    region_start: int          # source row of values[0]
    lookback: int
    horizon: int
    norm_mean: np.ndarray
    norm_std: np.ndarray
    positions: np.ndarray      # window start offsets into ``values``
    name: str = ""
    std_guarded: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def channels(self) -> int:
        return self.values.shape[1]

    @property
    def origins(self) -> np.ndarray:
        return self.positions + self.region_start

    def __getitem__(self, i: int) -> SeriesWindow:
        p = int(self.positions[i])
        L, T = self.lookback, self.horizon
        return SeriesWindow(self.values[p:p + L], self.values[p + L:p + L + T],
                            self.norm_mean, self.norm_std, p + self.region_start)

    def arrays(self, idx: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Stacked (x, y) for the selected windows: (n, L, C), (n, T, C)."""
        pos = self.positions if idx is None else self.positions[np.asarray(idx)]
        L, T = self.lookback, self.horizon
        xi = pos[:, None] + np.arange(L)[None, :]
        yi = pos[:, None] + L + np.arange(T)[None, :]
        return self.values[xi], self.values[yi]

    def subset(self, idx) -> WindowSet:
        return replace(self, positions=self.positions[np.asarray(idx, dtype=int)])


@dataclass
class SplitData:
    train: WindowSet
    val: WindowSet
    test: WindowSet
    mean: np.ndarray
    std: np.ndarray
    std_guarded: np.ndarray    # channels whose train std was zero and replaced by 1


def split_and_normalize(raw: np.ndarray, spec: DatasetSpec, lookback: int = 96, horizon: int = 96) -> SplitData:
    raw = np.asarray(raw, dtype=np.float64)
    starts, ends = split_borders(len(raw), spec.split_mode, lookback)
    counts = [e - s - lookback - horizon + 1 for s, e in zip(starts, ends)]
    if min(counts) < 1 or min(starts) < 0:
        raise SplitError(f"{spec.name}: {len(raw)} rows too short for L={lookback}, T={horizon} "
                         f"(window counts {counts})")
    train_rows = raw[starts[0]:ends[0]]
    mean = train_rows.mean(axis=0)
    std = train_rows.std(axis=0)
    guarded = std == 0
    std = np.where(guarded, 1.0, std)
    sets = []
    for part, s, e, n in zip(("train", "val", "test"), starts, ends, counts):
        region = (raw[s:e] - mean) / std
        sets.append(WindowSet(region, s, lookback, horizon, mean, std, np.arange(n),
                              f"{spec.name}/{part}", guarded))
    return SplitData(*sets, mean=mean, std=std, std_guarded=guarded)


def few_shot_subset(windows: WindowSet, fraction: float) -> WindowSet:
    """The first ``ceil(fraction * n)`` windows in temporal order."""
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    n = len(windows)
    keep = math.ceil(round(fraction * n, 9))
    return windows.subset(np.arange(keep))


def make_batches(n: int, batch_size: int, shuffle: bool = False, seed: int = 0) -> Iterator[np.ndarray]:
    """Yield index arrays over ``range(n)``; the last partial batch is kept."""
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    order = np.random.default_rng(seed).permutation(n) if shuffle else np.arange(n)
    for i in range(0, n, batch_size):
        yield order[i:i + batch_size]


# ---------------------------------------------------------------------------
# synthetic data
# ---------------------------------------------------------------------------

def synthetic_series(n_rows: int, channels: int = 3, seed: int = 0) -> np.ndarray:
    """Daily and weekly sinusoid mixtures with regime-switching noise bursts.

    Each channel mixes a 24-step and a 168-step cycle with its own phase and
    amplitude. A two-state Markov regime scales the noise; the high state
    also injects short sharp excursions.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(n_rows, dtype=float)
    out = np.empty((n_rows, channels))
    regime = np.zeros(n_rows, dtype=int)
    state = 0
    for i in range(n_rows):
        if rng.random() < (0.01 if state == 0 else 0.03):
            state = 1 - state
        regime[i] = state
    for c in range(channels):
        ph1, ph2 = rng.uniform(0, 2 * np.pi, size=2)
        a1 = rng.uniform(0.8, 1.5)
        a2 = rng.uniform(0.3, 0.8)
        base = a1 * np.sin(2 * np.pi * t / 24 + ph1) + a2 * np.sin(2 * np.pi * t / 168 + ph2)
        base += 0.3 * np.sin(2 * np.pi * t / 12 + ph1 * 0.5) * (c % 2)
        noise = rng.normal(0, 1, n_rows) * np.where(regime == 1, 0.35, 0.08)
        bursts = (regime == 1) * (rng.random(n_rows) < 0.02) * rng.normal(0, 1.5, n_rows)
        out[:, c] = base + noise + np.convolve(bursts, np.ones(4) / 2, mode="same") + 0.5 * c
    return out


def synthetic_spec(name: str = "Synthetic", channels: int = 3, rows: int = 2400,
                   csv_path: str = "") -> DatasetSpec:
    return DatasetSpec(name, csv_path, channels, "1 hour", "ratio_70_10_20",
                       "Synthetic hourly signals mixing daily and weekly cycles with "
                       "bursts of high volatility.", rows)


def synthetic_split(rows: int = 2400, channels: int = 3, seed: int = 0, lookback: int = 96,
                    horizon: int = 96, name: str = "Synthetic") -> tuple[DatasetSpec, SplitData]:
    """A ready split of the synthetic generator; counts follow ``split_window_counts``."""
    spec = synthetic_spec(name, channels, rows)
    return spec, split_and_normalize(synthetic_series(rows, channels, seed), spec, lookback, horizon)
