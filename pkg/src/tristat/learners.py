"""Cross-modal retrieval heads for the textual and symbolic branches."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from . import tensor as tn
from .errors import ConfigurationError
from .nn import LayerNorm, Linear, Module, MultiHeadAttention
from .tensor import Param, Tensor


class RetrievalHead(Module):
    """Cross-attend a (B, C, D) query into a token pool, then predict T steps.

    The prediction is GELU(LayerNorm(Linear(o))) applied per channel row and
    returned as (B, T, C).
    """

    def __init__(self, d_model: int, horizon: int, heads: int, rng: np.random.Generator):
        self.attn = MultiHeadAttention(d_model, heads, rng)
        self.head = Linear(d_model, horizon, rng)
        self.norm = LayerNorm(horizon)
        self.d_model = d_model

    def retrieve(self, query, pool, mask: np.ndarray | None = None) -> Tensor:
        query, pool = tn.as_tensor(query), tn.as_tensor(pool)
        if query.shape[-1] != self.d_model or pool.shape[-1] != self.d_model:
            raise ConfigurationError(f"retrieval: query {query.shape} / pool {pool.shape} "
                                     f"do not match d_model={self.d_model}")
        return self.attn(query, pool, pool, mask)

    def __call__(self, query, pool, mask: np.ndarray | None = None) -> Tensor:
        o = self.retrieve(query, pool, mask)
        return tn.gelu(self.norm(self.head(o))).swapaxes(1, 2)


class TextualLearner(RetrievalHead):
    """Text-augmented forecast from the prompt embedding pool."""


class SymbolicLearner(Module):
    """Three independent retrieval heads mixed by softmax-normalised scale weights."""

    SCALES = ("fine", "mid", "coarse")

    def __init__(self, d_model: int, horizon: int, heads: int, rng: np.random.Generator):
        self.scales = [RetrievalHead(d_model, horizon, heads, rng) for _ in self.SCALES]
        self.omega = Param(np.zeros(3))

    def mixing_weights(self) -> Tensor:
        return tn.softmax(self.omega, axis=-1)

    def scale_outputs(self, query, pools: Sequence, masks: Sequence | None = None) -> list[Tensor]:
        masks = masks if masks is not None else [None] * 3
        return [head(query, pool, mask) for head, pool, mask in zip(self.scales, pools, masks)]

    def __call__(self, query, pools: Sequence, masks: Sequence | None = None) -> Tensor:
        outs = self.scale_outputs(query, pools, masks)
        w = self.mixing_weights()
        return outs[0] * w[0] + outs[1] * w[1] + outs[2] * w[2]
