"""The tri-modal forecaster and the per-window feature pipeline feeding it."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import tensor as tn
from .data import WindowSet
from .embedding import AlignProjection, EmbeddingProvider, encode_symbols, encode_text, pad_ids, tokenize
from .errors import ConfigurationError
from .fusion import Router, fuse
from .learners import SymbolicLearner, TextualLearner
from .nn import Module
from .prompt import render_prompt, volatility_descriptors
from .symbolize import (CHANNEL_SEPARATOR, Codebook, assign_indices, check_tolerances, compress_array,
                        digitize, zscore)
from .temporal import PatchConfig, TemporalLearner
from .tensor import Tensor

EXPERTS = ("temp", "txt", "sym")


@dataclass
class ModelConfig:
    lookback: int = 96
    horizon: int = 96
    channels: int = 7
    d_model: int = 128
    heads: int = 4
    patch_len: int = 16
    stride: int = 8
    top_k: int = 5
    bank_capacity: int = 256
    embed_dim: int = 64
    eta: float = 2.0
    router_bias: tuple[float, ...] = (1.0, 0.0, 0.0)
    tolerances: tuple[float, float, float] = (0.01, 0.10, 0.50)
    use_text: bool = True
    use_symbolic: bool = True
    use_temperature: bool = True

    @property
    def experts(self) -> tuple[str, ...]:
        return tuple(e for e in EXPERTS
                     if e == "temp" or (e == "txt" and self.use_text) or (e == "sym" and self.use_symbolic))


# ---------------------------------------------------------------------------
# features
# ---------------------------------------------------------------------------

@dataclass
class WindowFeatures:
    """Precomputed model inputs for every window of a ``WindowSet``."""

    alpha: np.ndarray                       # (n,)
    text_ids: list[np.ndarray]
    sym_ids: list[list[np.ndarray]]         # [scale][window] -> ids
    prompts: list[str] = field(default_factory=list)
    symbols: list[list[str]] = field(default_factory=list)   # [scale][window] -> string


def fit_codebooks(windows: WindowSet, tolerances: Sequence[float], max_windows: int = 256,
                  radius_scale: float = np.sqrt(2.0)) -> list[Codebook]:
    """One codebook per tolerance from z-scored training windows of every channel.

    At most ``max_windows`` windows, evenly spaced, contribute pieces.
    """
    tolerances = check_tolerances(tolerances)
    n = len(windows)
    pick = np.unique(np.linspace(0, n - 1, min(n, max_windows)).round().astype(int))
    x, _ = windows.arrays(pick)
    books = []
    for tol in tolerances:
        pts = []
        for w in x:
            for c in range(w.shape[1]):
                pts.append(compress_array(zscore(w[:, c]), tol))
        books.append(digitize(np.vstack(pts), tol, radius=tol * radius_scale))
    return books


def symbol_strings(x: np.ndarray, codebooks: Sequence[Codebook]) -> list[list[str]]:
    """Per scale, per window: channel-wise symbol strings joined by the separator."""
    out: list[list[str]] = []
    n, _, channels = x.shape
    cols = [zscore(w[:, c]) for w in x for c in range(channels)]
    for cb in codebooks:
        pieces = [compress_array(col, cb.tol) for col in cols]
        idx = assign_indices(np.vstack(pieces), cb)
        bounds = np.cumsum([0] + [len(p) for p in pieces])
        syms = np.array(cb.symbols, dtype=object)
        strings = ["".join(syms[idx[a:b]]) for a, b in zip(bounds[:-1], bounds[1:])]
        out.append([CHANNEL_SEPARATOR.join(strings[i * channels:(i + 1) * channels]) for i in range(n)])
    return out


def build_vocab(prompts: Sequence[str], codebooks: Sequence[Codebook]) -> list[str]:
    vocab: dict[str, None] = {}
    for p in prompts:
        for tok in tokenize(p):
            vocab.setdefault(tok)
    for cb in codebooks:
        for s in cb.symbols:
            vocab.setdefault(s)
    vocab.setdefault(CHANNEL_SEPARATOR)
    return list(vocab)


def featurize(windows: WindowSet, description: str, codebooks: Sequence[Codebook],
              provider: EmbeddingProvider | None, use_text: bool = True,
              use_symbolic: bool = True) -> WindowFeatures:
    x, _ = windows.arrays()
    alpha = volatility_descriptors(x)
    prompts = [render_prompt(w, description, windows.lookback, windows.horizon).text for w in x] \
        if use_text else []
    symbols = symbol_strings(x, codebooks) if use_symbolic else []
    if provider is None:
        return WindowFeatures(alpha, [], [], prompts, symbols)
    text_ids = [encode_text(p, provider) for p in prompts]
    sym_ids = [[provider.ids(tokenize(s, symbolic=True)) for s in scale] for scale in symbols]
    return WindowFeatures(alpha, text_ids, sym_ids, prompts, symbols)


def attach_ids(feats: WindowFeatures, provider: EmbeddingProvider) -> WindowFeatures:
    feats.text_ids = [encode_text(p, provider) for p in feats.prompts]
    feats.sym_ids = [[provider.ids(tokenize(s, symbolic=True)) for s in scale] for scale in feats.symbols]
    return feats


@dataclass
class Batch:
    x: np.ndarray
    y: np.ndarray
    alpha: np.ndarray
    text: tuple[np.ndarray, np.ndarray] | None
    symbols: list[tuple[np.ndarray, np.ndarray]] | None
    origins: np.ndarray


def make_batch(windows: WindowSet, feats: WindowFeatures, idx: np.ndarray) -> Batch:
    idx = np.asarray(idx, dtype=int)
    x, y = windows.arrays(idx)
    text = pad_ids([feats.text_ids[i] for i in idx]) if feats.text_ids else None
    syms = [pad_ids([scale[i] for i in idx]) for scale in feats.sym_ids] if feats.sym_ids else None
    return Batch(x, y, feats.alpha[idx], text, syms, windows.origins[idx])


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------

@dataclass
class ForecastBundle:
    y_hat: Tensor
    y_temp: Tensor
    y_txt: Tensor | None
    y_sym: Tensor | None
    weights: Tensor            # (B, T, C, E) in ``experts`` order
    lam: np.ndarray
    experts: tuple[str, ...]


class STaTModel(Module):
    def __init__(self, cfg: ModelConfig, provider: EmbeddingProvider, seed: int = 0):
        if provider.dim != cfg.embed_dim:
            raise ConfigurationError(f"provider dim {provider.dim} != embed_dim {cfg.embed_dim}")
        rng = np.random.default_rng(seed)
        self.cfg = cfg
        self._provider = provider
        pc = PatchConfig(cfg.patch_len, cfg.stride, cfg.d_model, cfg.heads)
        self.temporal = TemporalLearner(cfg.lookback, cfg.horizon, cfg.channels, pc, rng,
                                        cfg.top_k, cfg.bank_capacity)
        self.align = AlignProjection(cfg.embed_dim, cfg.d_model, rng)
        self.textual = TextualLearner(cfg.d_model, cfg.horizon, cfg.heads, rng) if cfg.use_text else None
        self.symbolic = SymbolicLearner(cfg.d_model, cfg.horizon, cfg.heads, rng) if cfg.use_symbolic else None
        experts = cfg.experts
        bias = [cfg.router_bias[EXPERTS.index(e)] for e in experts]
        self.router = Router(cfg.d_model, cfg.horizon, rng, len(experts), cfg.eta, bias, cfg.use_temperature)
        self.name_parameters()

    @property
    def provider(self) -> EmbeddingProvider:
        return self._provider

    @property
    def bank(self):
        return self.temporal.bank

    def pool(self, ids: np.ndarray) -> Tensor:
        """Frozen lookup followed by the shared alignment projection."""
        return self.align(tn.Tensor(self._provider.lookup(ids)))

    def __call__(self, batch: Batch, update_bank: bool = True) -> ForecastBundle:
        y_temp, q_temp, _ = self.temporal(batch.x, update_bank=update_bank)
        preds = [y_temp]
        y_txt = y_sym = None
        if self.textual is not None:
            ids, mask = batch.text
            y_txt = self.textual(q_temp, self.pool(ids), mask)
            preds.append(y_txt)
        if self.symbolic is not None:
            pools = [self.pool(ids) for ids, _ in batch.symbols]
            masks = [mask for _, mask in batch.symbols]
            y_sym = self.symbolic(q_temp, pools, masks)
            preds.append(y_sym)
        weights, lam = self.router(q_temp, batch.alpha)
        return ForecastBundle(fuse(weights, preds), y_temp, y_txt, y_sym, weights, lam, self.cfg.experts)
