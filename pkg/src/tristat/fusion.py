"""Volatility-aware temperature routing over the modality experts."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from . import tensor as tn
from .errors import ConfigurationError, ContractError
from .nn import Linear, Module
from .tensor import Param, Tensor

DEFAULT_ETA = 2.0


def inverse_temperature(alpha, eta: float = DEFAULT_ETA) -> np.ndarray:
    """lambda = eta * sigmoid(alpha)."""
    alpha = np.asarray(alpha, dtype=float)
    return eta * tn._stable_sigmoid(np.atleast_1d(alpha)).reshape(alpha.shape)


def routing_weights(logits, lam) -> Tensor:
    """softmax over the last axis of ``lam * logits``; ``lam`` broadcasts from the batch axis."""
    logits = tn.as_tensor(logits)
    lam = np.asarray(lam, dtype=float)
    if lam.ndim == 1:
        lam = lam.reshape((-1,) + (1,) * (logits.ndim - 1))
    return tn.softmax(logits * lam, axis=-1)


class Router(Module):
    """Maps the temporal query to per-step, per-channel expert logits."""

    def __init__(self, d_model: int, horizon: int, rng: np.random.Generator, n_experts: int = 3,
                 eta: float = DEFAULT_ETA, bias: Sequence[float] | None = None,
                 use_temperature: bool = True):
        if eta <= 0:
            raise ConfigurationError(f"eta must be positive, got {eta}")
        self.proj = Linear(d_model, horizon * n_experts, rng)
        if bias is None:
            bias = [1.0] + [0.0] * (n_experts - 1)
        if len(bias) != n_experts:
            raise ConfigurationError(f"bias has {len(bias)} entries for {n_experts} experts")
        self.bias = Param(np.asarray(bias, dtype=float), trainable=False)
        self.eta = eta
        self.horizon = horizon
        self.n_experts = n_experts
        self.use_temperature = use_temperature

    def logits(self, q_temp) -> Tensor:
        q_temp = tn.as_tensor(q_temp)
        b, c, _ = q_temp.shape
        z = self.proj(q_temp).reshape(b, c, self.horizon, self.n_experts).transpose(0, 2, 1, 3)
        return z + self.bias

    def temperature(self, alpha) -> np.ndarray:
        alpha = np.asarray(alpha, dtype=float).reshape(-1)
        if not self.use_temperature:
            return np.ones_like(alpha)
        return inverse_temperature(alpha, self.eta)

    def __call__(self, q_temp, alpha) -> tuple[Tensor, np.ndarray]:
        """Weights (B, T, C, E) and the per-sample inverse temperature."""
        lam = self.temperature(alpha)
        return routing_weights(self.logits(q_temp), lam), lam


def fuse(weights, predictions: Sequence) -> Tensor:
    """Elementwise convex combination of expert predictions (each B x T x C)."""
    weights = tn.as_tensor(weights)
    preds = [tn.as_tensor(p) for p in predictions]
    if weights.shape[-1] != len(preds):
        raise ContractError(f"{weights.shape[-1]} weights for {len(preds)} predictions")
    for p in preds:
        if p.shape != weights.shape[:-1]:
            raise ContractError(f"prediction shape {p.shape} does not match weights {weights.shape[:-1]}")
    out = None
    for i, p in enumerate(preds):
        term = weights[..., i] * p
        out = term if out is None else out + term
    return out
