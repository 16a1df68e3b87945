"""Data preparation, the training loop with early stopping, and checkpoints."""
from __future__ import annotations

import json
import math
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import tensor as tn
from .config import RunConfig
from .data import (DatasetSpec, SplitData, benchmark_spec, few_shot_subset, load_csv, load_registry,
                   make_batches, split_and_normalize, synthetic_series, synthetic_spec)
from .embedding import EmbeddingProvider
from .errors import ConfigurationError, DataLoadError, DivergenceError
from .losses import ADFState, adf_loss, mse
from .model import STaTModel, WindowFeatures, attach_ids, build_vocab, featurize, fit_codebooks, make_batch
from .symbolize import Codebook
from .tensor import Adam


# ---------------------------------------------------------------------------
# data
# ---------------------------------------------------------------------------

def resolve_dataset(cfg: RunConfig, name: str | None = None) -> DatasetSpec:
    name = name or cfg.dataset
    if name.lower() == "synthetic":
        return synthetic_spec(channels=cfg.synthetic_channels, rows=cfg.synthetic_rows)
    if cfg.registry:
        reg = load_registry(cfg.registry)
        if name in reg:
            return reg[name]
    return benchmark_spec(name)


def load_split(cfg: RunConfig, name: str | None = None) -> tuple[DatasetSpec, SplitData]:
    spec = resolve_dataset(cfg, name)
    if not spec.csv_path:
        raw = synthetic_series(cfg.synthetic_rows, cfg.synthetic_channels, cfg.data_seed)
    else:
        raw, _ = load_csv(spec)
    return spec, split_and_normalize(raw, spec, cfg.lookback, cfg.horizon)


@dataclass
class Prepared:
    """Everything a run needs besides the model: split, codebooks, frozen embeddings, features."""

    spec: DatasetSpec
    split: SplitData
    codebooks: list[Codebook]
    provider: EmbeddingProvider
    features: dict[str, WindowFeatures]

    @property
    def channels(self) -> int:
        return self.split.train.channels


def make_provider(cfg: RunConfig, prompts, codebooks) -> EmbeddingProvider:
    if cfg.embeddings:
        provider = EmbeddingProvider.from_file(cfg.embeddings, seed=cfg.data_seed)
    else:
        provider = EmbeddingProvider.random(build_vocab(prompts, codebooks), cfg.embed_dim, cfg.data_seed)
    if provider.dim != cfg.embed_dim:
        raise ConfigurationError(f"embedding file has dim {provider.dim}, config embed_dim={cfg.embed_dim}")
    return provider


def prepare(cfg: RunConfig, provider: EmbeddingProvider | None = None, name: str | None = None) -> Prepared:
    """Load, split, fit codebooks on the training split and featurise all three splits.

    Text and symbol features are always built so ablation variants can
    share one ``Prepared``.
    """
    spec, split = load_split(cfg, name)
    if cfg.few_shot < 1:
        split.train = few_shot_subset(split.train, cfg.few_shot)
    books = fit_codebooks(split.train, cfg.tolerances, cfg.codebook_windows)
    feats = {part: featurize(getattr(split, part), spec.description, books, None)
             for part in ("train", "val", "test")}
    if provider is None:
        provider = make_provider(cfg, feats["train"].prompts, books)
    for f in feats.values():
        attach_ids(f, provider)
    return Prepared(spec, split, books, provider, feats)


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

@dataclass
class EpochLog:
    epoch: int
    lr: float
    train_loss: float
    val_loss: float
    val_mse: float
    seconds: float


@dataclass
class TrainLog:
    initial_val_loss: float = math.nan
    initial_val_mse: float = math.nan
    epochs: list[EpochLog] = field(default_factory=list)
    best_epoch: int = -1              # -1: the initialisation was never beaten
    stopped_early: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> TrainLog:
        d = dict(d)
        d["epochs"] = [EpochLog(**e) for e in d.get("epochs", [])]
        return cls(**d)


@dataclass
class Snapshot:
    params: dict[str, np.ndarray]
    log_sigma: np.ndarray
    bank: dict[str, np.ndarray]

    @classmethod
    def take(cls, model: STaTModel, adf: ADFState) -> Snapshot:
        return cls(model.state_dict(), adf.log_sigma.data.copy(), model.bank.state())

    def restore(self, model: STaTModel, adf: ADFState) -> None:
        model.load_state_dict(self.params)
        adf.log_sigma.data[...] = self.log_sigma
        model.bank.load_state(self.bank)


@dataclass
class RunResult:
    config: RunConfig
    model: STaTModel
    adf: ADFState
    prepared: Prepared
    log: TrainLog

    @property
    def codebooks(self) -> list[Codebook]:
        return self.prepared.codebooks


def lr_for_epoch(base_lr: float, epoch: int) -> float:
    """Halved every epoch, starting at ``base_lr`` for epoch 0."""
    return base_lr * 2.0 ** (-epoch)


def training_loss(cfg: RunConfig, pred, target, adf: ADFState):
    if cfg.no_adf:
        loss = mse(pred, target)
        return loss, {"mse": loss.item()}
    return adf_loss(pred, target, adf)


def validation_loss(cfg: RunConfig, model: STaTModel, adf: ADFState, prepared: Prepared) -> tuple[float, float]:
    """(total loss, mse) over the validation windows, bank frozen."""
    windows, feats = prepared.split.val, prepared.features["val"]
    bank = model.bank
    was_frozen = bank.frozen
    bank.frozen = True
    tot = sq = 0.0
    try:
        with tn.no_grad():
            for idx in make_batches(len(windows), cfg.eval_batch_size):
                batch = make_batch(windows, feats, idx)
                out = model(batch, update_bank=False)
                loss, parts = training_loss(cfg, out.y_hat, batch.y, adf)
                tot += loss.item() * len(idx)
                sq += parts["mse"] * len(idx)
    finally:
        bank.frozen = was_frozen
    return tot / len(windows), sq / len(windows)


def build_model(cfg: RunConfig, prepared: Prepared) -> tuple[STaTModel, ADFState]:
    model = STaTModel(cfg.model_config(prepared.channels), prepared.provider, seed=cfg.seed)
    return model, ADFState(cfg.svd_rank, cfg.aux_patch_len)


def train(cfg: RunConfig, prepared: Prepared | None = None, verbose: bool = False) -> RunResult:
    """Adam with a per-epoch halving schedule and early stopping on validation total loss.

    The memory bank is emptied at the start of every epoch, filled while
    training and frozen for validation. The returned model carries the
    parameters, uncertainty weights and bank of the best validation epoch.
    """
    prepared = prepared or prepare(cfg)
    model, adf = build_model(cfg, prepared)
    log = TrainLog()
    if cfg.max_epochs == 0:
        return RunResult(cfg, model, adf, prepared, log)

    params = model.parameters(trainable_only=True)
    if not cfg.no_adf:
        params.append(adf.log_sigma)
    opt = Adam(params, lr=cfg.lr)
    best = Snapshot.take(model, adf)
    log.initial_val_loss, log.initial_val_mse = validation_loss(cfg, model, adf, prepared)
    best_loss = log.initial_val_loss
    bad = 0
    train_set, train_feats = prepared.split.train, prepared.features["train"]
    for epoch in range(cfg.max_epochs):
        t0 = time.perf_counter()
        opt.lr = lr_for_epoch(cfg.lr, epoch)
        model.bank.reset()
        total, count = 0.0, 0
        for idx in make_batches(len(train_set), cfg.batch_size, shuffle=True, seed=cfg.seed * 1009 + epoch):
            batch = make_batch(train_set, train_feats, idx)
            opt.zero_grad()
            out = model(batch, update_bank=True)
            loss, _ = training_loss(cfg, out.y_hat, batch.y, adf)
            if not np.isfinite(loss.item()):
                best.restore(model, adf)
                err = DivergenceError(f"non-finite loss at epoch {epoch}, step {count // cfg.batch_size}; "
                                      f"restored best state (epoch {log.best_epoch})")
                err.result = RunResult(cfg, model, adf, prepared, log)
                raise err
            loss.backward()
            opt.step()
            total += loss.item() * len(idx)
            count += len(idx)
        val_loss, val_mse = validation_loss(cfg, model, adf, prepared)
        log.epochs.append(EpochLog(epoch, opt.lr, total / count, val_loss, val_mse, time.perf_counter() - t0))
        if verbose:
            e = log.epochs[-1]
            print(f"epoch {epoch} lr={e.lr:.2e} train={e.train_loss:.4f} val={e.val_loss:.4f} "
                  f"val_mse={e.val_mse:.4f} ({e.seconds:.1f}s)")
        if val_loss < best_loss:
            best_loss, bad = val_loss, 0
            best = Snapshot.take(model, adf)
            log.best_epoch = epoch
        else:
            bad += 1
            if bad >= cfg.patience:
                log.stopped_early = True
                break
    best.restore(model, adf)
    return RunResult(cfg, model, adf, prepared, log)


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

def save_checkpoint(run: RunResult, path: str | os.PathLike) -> Path:
    """One ``.npz`` holding weights, bank, frozen embeddings, codebooks, config and log."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    prov = run.model.provider
    n_vocab = len(prov.vocab)
    vocab = [t for t, _ in sorted(prov.vocab.items(), key=lambda kv: kv[1])]
    arrays = {f"param/{k}": v for k, v in run.model.state_dict().items()}
    arrays.update({f"bank/{k}": v for k, v in run.model.bank.state().items()})
    arrays.update({
        "adf/log_sigma": run.adf.log_sigma.data,
        "provider/vocab": np.array(vocab, dtype=str),
        "provider/matrix": prov.table[1:1 + n_vocab],
        "provider/oov": prov.table[1 + n_vocab:],
        "provider/seed": np.array(prov.seed),
        "config": np.array(run.config.to_text()),
        "dataset": np.array(json.dumps({"name": run.prepared.spec.name,
                                        "description": run.prepared.spec.description,
                                        "channels": run.prepared.channels})),
        "log": np.array(json.dumps(run.log.to_dict())),
    })
    for i, cb in enumerate(run.prepared.codebooks):
        arrays[f"codebook/{i}"] = np.array(cb.to_text())
    with path.open("wb") as fh:
        np.savez(fh, **arrays)
    return path


@dataclass
class Checkpoint:
    config: RunConfig
    model: STaTModel
    adf: ADFState
    codebooks: list[Codebook]
    dataset: dict
    log: TrainLog

    @property
    def provider(self) -> EmbeddingProvider:
        return self.model.provider


def load_checkpoint(path: str | os.PathLike) -> Checkpoint:
    path = Path(path)
    if not path.exists():
        raise DataLoadError(f"checkpoint not found: {path}")
    with np.load(path, allow_pickle=False) as z:
        cfg = RunConfig.from_text(str(z["config"]), str(path))
        meta = json.loads(str(z["dataset"]))
        provider = EmbeddingProvider([str(t) for t in z["provider/vocab"]], z["provider/matrix"],
                                     z["provider/oov"], int(z["provider/seed"]))
        model = STaTModel(cfg.model_config(meta["channels"]), provider, seed=cfg.seed)
        model.load_state_dict({k[len("param/"):]: z[k] for k in z.files if k.startswith("param/")})
        model.bank.load_state({k[len("bank/"):]: z[k] for k in z.files if k.startswith("bank/")})
        adf = ADFState(cfg.svd_rank, cfg.aux_patch_len)
        adf.log_sigma.data[...] = z["adf/log_sigma"]
        books = [Codebook.from_text(str(z[f"codebook/{i}"])) for i in range(len(cfg.tolerances))]
        log = TrainLog.from_dict(json.loads(str(z["log"])))
    return Checkpoint(cfg, model, adf, books, meta, log)
