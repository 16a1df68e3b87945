"""Ablation and zero-shot harnesses."""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .errors import ConfigurationError, ContractError
from .evaluation import MetricReport, predict, report_for
from .model import attach_ids, featurize, fit_codebooks
from .training import Checkpoint, load_split, prepare, train

ABLATION_HORIZONS = (96, 192, 336, 720)

# report column -> ablation flags switched on
VARIANTS: dict[str, tuple[str, ...]] = {
    "Full": (),
    "w/o TRL": ("no_trl",),
    "w/o SRL": ("no_srl",),
    "w/o VAT": ("no_vat",),
    "w/o ADF": ("no_adf",),
}
ABLATION_METRICS = ("MSE", "DTW")


def pct_deg(full: float, variant: float) -> float:
    """Relative degradation of ``variant`` against ``full``, in percent."""
    return (variant - full) / full * 100.0


@dataclass
class AblationReport:
    """values[variant][horizon] = (mse, dtw); Avg and %Deg rows are derived."""

    dataset: str
    horizons: tuple[int, ...]
    values: dict[str, dict[int, tuple[float, float]]] = field(default_factory=dict)

    @property
    def variants(self) -> list[str]:
        return list(self.values)

    @property
    def row_labels(self) -> list[str]:
        return [str(h) for h in self.horizons] + ["Avg", "%Deg"]

    def average(self, variant: str) -> tuple[float, float]:
        vals = np.array([self.values[variant][h] for h in self.horizons])
        return float(vals[:, 0].mean()), float(vals[:, 1].mean())

    def degradation(self, variant: str) -> tuple[float, float]:
        if variant == "Full":
            return math.nan, math.nan
        full, var = self.average("Full"), self.average(variant)
        return pct_deg(full[0], var[0]), pct_deg(full[1], var[1])

    def cell(self, row: str, variant: str) -> tuple[float, float]:
        if row == "Avg":
            return self.average(variant)
        if row == "%Deg":
            return self.degradation(variant)
        return self.values[variant][int(row)]

    def grid(self) -> np.ndarray:
        """(rows, variants, metrics) array in ``row_labels`` x ``variants`` x (MSE, DTW) order."""
        return np.array([[self.cell(r, v) for v in self.variants] for r in self.row_labels])

    def as_text(self) -> str:
        head = f"{'':<8}" + "".join(f"{v:>20}" for v in self.variants)
        sub = f"{'':<8}" + "".join(f"{'MSE':>10}{'DTW':>10}" for _ in self.variants)
        lines = [head, sub]
        for r in self.row_labels:
            cells = []
            for v in self.variants:
                for x in self.cell(r, v):
                    if math.isnan(x):
                        cells.append(f"{'-':>10}")
                    elif r == "%Deg":
                        cells.append(f"{x:>9.2f}%")
                    else:
                        cells.append(f"{x:>10.3f}")
            lines.append(f"{r:<8}" + "".join(cells))
        return "\n".join(lines)

    def to_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["row", *(f"{v}:{m}" for v in self.variants for m in ABLATION_METRICS)])
            for r in self.row_labels:
                w.writerow([r, *(f"{x:.6f}" if not math.isnan(x) else "" for v in self.variants
                                 for x in self.cell(r, v))])


def run_ablation(cfg: RunConfig, horizons=ABLATION_HORIZONS, variants: dict | None = None,
                 verbose: bool = False) -> AblationReport:
    """Train and test every variant at every horizon on the config's dataset.

    Features, codebooks and frozen embeddings are shared by the variants of
    one horizon; each variant trains from the same seed.
    """
    variants = VARIANTS if variants is None else variants
    if "Full" not in variants:
        raise ConfigurationError("ablation needs a 'Full' variant as reference")
    horizons = tuple(int(h) for h in horizons)
    base = cfg.replace(no_trl=False, no_srl=False, no_vat=False, no_adf=False)
    report = AblationReport(cfg.dataset, horizons, {v: {} for v in variants})
    for h in horizons:
        hcfg = base.replace(horizon=h)
        prepared = prepare(hcfg)
        for name, flags in variants.items():
            run = train(hcfg.with_ablations(flags), prepared)
            fc = predict(run.model, prepared.split.test, prepared.features["test"], hcfg.eval_batch_size)
            row = report_for(fc, cfg.dataset).row(h)
            report.values[name][h] = (row.mse, row.dtw)
            if verbose:
                print(f"T={h} {name:<8} mse={row.mse:.4f} dtw={row.dtw:.4f}")
    return report


def run_zero_shot(ckpt: Checkpoint, target: str, batch_size: int = 64) -> MetricReport:
    """Evaluate a trained model on another dataset's test split without touching its weights.

    Codebooks are refit on the target's training split; the model, its
    memory bank and the frozen embeddings stay as trained.
    """
    cfg = ckpt.config
    spec, split = load_split(cfg, target)
    channels = ckpt.model.cfg.channels
    if split.test.channels != channels:
        raise ConfigurationError(f"zero-shot channel mismatch: source has {channels}, "
                                 f"{spec.name} has {split.test.channels}")
    before = ckpt.model.parameter_hash()
    books = fit_codebooks(split.train, cfg.tolerances, cfg.codebook_windows)
    feats = attach_ids(featurize(split.test, spec.description, books, None), ckpt.provider)
    fc = predict(ckpt.model, split.test, feats, batch_size)
    if ckpt.model.parameter_hash() != before:
        raise ContractError("zero-shot evaluation changed model parameters")
    src = ckpt.dataset.get("name", cfg.dataset)
    return report_for(fc, f"{src}->{spec.name}")

