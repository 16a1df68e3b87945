"""Patch embedding, historical memory retrieval and the temporal forecast head."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as tn
from .errors import ConfigurationError
from .nn import MLP, LayerNorm, Linear, Module, MultiHeadAttention
from .tensor import Param, Tensor


@dataclass(frozen=True)
class PatchConfig:
    patch_len: int = 16
    stride: int = 8
    d_model: int = 128
    heads: int = 4

    def __post_init__(self):
        if not 1 <= self.stride <= self.patch_len:
            raise ConfigurationError(f"stride {self.stride} must lie in [1, patch_len={self.patch_len}]")
        if self.d_model % self.heads:
            raise ConfigurationError(f"d_model={self.d_model} not divisible by heads={self.heads}")

    def num_patches(self, lookback: int) -> int:
        if lookback < self.patch_len:
            raise ConfigurationError(f"look-back {lookback} shorter than patch length {self.patch_len}")
        return (lookback - self.patch_len) // self.stride + 1


def patch_index(lookback: int, patch_len: int, stride: int) -> np.ndarray:
    n = (lookback - patch_len) // stride + 1
    return np.arange(n)[:, None] * stride + np.arange(patch_len)[None, :]


def patchify(x, cfg: PatchConfig) -> Tensor:
    """(B, L, C) -> (B, N, P*C); each patch flattens time-major, channel-minor."""
    x = tn.as_tensor(x)
    b, L, c = x.shape
    n = cfg.num_patches(L)
    idx = patch_index(L, cfg.patch_len, cfg.stride)
    return tn.take(x, idx, axis=1).reshape(b, n, cfg.patch_len * c)


class MemoryBank:
    """FIFO store of pooled patch embeddings, oldest first."""

    def __init__(self, capacity: int, dim: int):
        if capacity < 1:
            raise ConfigurationError(f"bank capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.dim = dim
        self._slots = np.zeros((capacity, dim))
        self._head = 0        # next write slot
        self.fill = 0
        self.frozen = False

    def reset(self) -> None:
        self._slots[:] = 0.0
        self._head = 0
        self.fill = 0

    def entries(self) -> np.ndarray:
        """Current contents ordered oldest to newest."""
        if self.fill < self.capacity:
            return self._slots[:self.fill].copy()
        return np.roll(self._slots, -self._head, axis=0).copy()

    def enqueue(self, vectors: np.ndarray) -> None:
        if self.frozen:
            return
        for v in np.atleast_2d(np.asarray(vectors, dtype=float)):
            self._slots[self._head] = v
            self._head = (self._head + 1) % self.capacity
            self.fill = min(self.fill + 1, self.capacity)

    def update(self, x_emb) -> None:
        """Enqueue the mean over patches of each batch item."""
        data = x_emb.data if isinstance(x_emb, Tensor) else np.asarray(x_emb)
        self.enqueue(data.mean(axis=1))

    def state(self) -> dict[str, np.ndarray]:
        return {"slots": self._slots.copy(), "head": np.array(self._head), "fill": np.array(self.fill)}

    def load_state(self, state: dict[str, np.ndarray]) -> None:
        self._slots = np.array(state["slots"], dtype=float)
        self._head = int(state["head"])
        self.fill = int(state["fill"])


def retrieve(x_emb, bank_entries: np.ndarray, k: int) -> Tensor:
    """Similarity-weighted average of the top-k bank entries for every patch.

    Cosine similarity ranks entries (ties go to the older one) and a softmax
    over the kept similarities weights them. Gradient flows into ``x_emb``
    through the weights; bank entries are constants.
    """
    x_emb = tn.as_tensor(x_emb)
    kk = min(k, len(bank_entries))
    sims = tn.cosine_similarity(x_emb, bank_entries)              # (B, N, fill)
    top, idx = tn.top_k(sims, kk, axis=-1)                         # (B, N, k)
    w = tn.softmax(top, axis=-1)
    gathered = bank_entries[idx]                                   # (B, N, k, D)
    return tn.matmul(w.reshape(*w.shape[:-1], 1, kk), gathered).reshape(*x_emb.shape)


class TemporalLearner(Module):
    def __init__(self, lookback: int, horizon: int, channels: int, cfg: PatchConfig,
                 rng: np.random.Generator, top_k: int = 5, bank_capacity: int = 256):
        self.cfg = cfg
        self.lookback = lookback
        self.horizon = horizon
        self.channels = channels
        self.top_k = top_k
        d = cfg.d_model
        self.n_patches = cfg.num_patches(lookback)
        self.patch_proj = Linear(cfg.patch_len * channels, d, rng)
        self.pos_embedding = Param(rng.normal(0, 0.02, (self.n_patches, d)))
        self.local_mlp = MLP(d, 2 * d, d, rng)
        self.self_attn = MultiHeadAttention(d, cfg.heads, rng)
        self.head = Linear(self.n_patches * d, horizon * channels, rng)
        self.query_proj = Linear(d, d, rng)
        self.query_norm = LayerNorm(d)
        self.channel_embedding = Param(rng.normal(0, 0.02, (channels, d)))
        self._bank = MemoryBank(bank_capacity, d)

    @property
    def bank(self) -> MemoryBank:
        return self._bank

    def embed_patches(self, patches) -> Tensor:
        patches = tn.as_tensor(patches)
        n = patches.shape[1]
        if n > self.pos_embedding.shape[0]:
            raise ConfigurationError(f"{n} patches exceed positional table of {self.pos_embedding.shape[0]}")
        pos = self.pos_embedding if n == self.pos_embedding.shape[0] else self.pos_embedding[:n]
        return self.patch_proj(patches) + pos

    def local_correlation(self, x_emb: Tensor, bank: MemoryBank | None = None) -> Tensor:
        bank = self._bank if bank is None else bank
        if bank.fill < 1:
            return x_emb
        retrieved = retrieve(x_emb, bank.entries(), self.top_k)
        return x_emb + self.local_mlp(retrieved)

    def global_correlation(self, x_emb: Tensor) -> Tensor:
        return self.self_attn(x_emb, x_emb, x_emb).mean(axis=1)

    def __call__(self, x, update_bank: bool = True) -> tuple[Tensor, Tensor, Tensor]:
        """Return (y_temp (B,T,C), q_temp (B,C,D), f_temp (B,N,D))."""
        x = tn.as_tensor(x)
        b = x.shape[0]
        x_emb = self.embed_patches(patchify(x, self.cfg))
        m_local = self.local_correlation(x_emb)
        m_global = self.global_correlation(x_emb)
        if update_bank:
            self._bank.update(x_emb)          # after retrieval: no self-retrieval
        f_temp = m_local + m_global.reshape(b, 1, self.cfg.d_model)
        y_temp = self.head(f_temp.reshape(b, self.n_patches * self.cfg.d_model))
        y_temp = y_temp.reshape(b, self.horizon, self.channels)
        pooled = self.query_norm(self.query_proj(f_temp.mean(axis=1)))
        q_temp = pooled.reshape(b, 1, self.cfg.d_model) + self.channel_embedding
        return y_temp, q_temp, f_temp
