"""Parameter containers and the small layer set used by the learners."""
from __future__ import annotations

import hashlib
from typing import Iterator

import numpy as np

from . import tensor as tn
from .errors import ConfigurationError
from .tensor import Param, Tensor


class Module:
    """Base class: discovers ``Param`` and ``Module`` attributes recursively."""

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Param]]:
        for key, value in vars(self).items():
            if key.startswith("_"):
                continue
            name = f"{prefix}{key}"
            if isinstance(value, Param):
                yield name, value
            elif isinstance(value, Module):
                yield from value.named_parameters(name + ".")
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Param):
                        yield f"{name}.{i}", item
                    elif isinstance(item, Module):
                        yield from item.named_parameters(f"{name}.{i}.")

    def parameters(self, trainable_only: bool = False) -> list[Param]:
        return [p for _, p in self.named_parameters() if p.trainable or not trainable_only]

    def name_parameters(self) -> None:
        """Stamp every parameter with its dotted path; paths are unique by construction."""
        seen: set[int] = set()
        for name, p in self.named_parameters():
            if id(p) in seen:
                continue
            seen.add(id(p))
            p.name = name

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        own = dict(self.named_parameters())
        missing = set(own) - set(state)
        if missing:
            raise ConfigurationError(f"state is missing parameters: {sorted(missing)[:5]}")
        for name, p in own.items():
            arr = np.asarray(state[name], dtype=np.float64)
            if arr.shape != p.shape:
                raise ConfigurationError(f"{name}: stored shape {arr.shape} != {p.shape}")
            p.data[...] = arr

    def parameter_hash(self, trainable: bool | None = None) -> str:
        h = hashlib.sha256()
        for name, p in sorted(self.named_parameters()):
            if trainable is not None and p.trainable != trainable:
                continue
            h.update(name.encode())
            h.update(np.ascontiguousarray(p.data).tobytes())
        return h.hexdigest()


def _uniform(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Linear(Module):
    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator, bias: bool = True):
        self.weight = Param(_uniform(rng, (d_in, d_out), d_in))
        self.bias = Param(_uniform(rng, (d_out,), d_in)) if bias else None
        self.d_in = d_in
        self.d_out = d_out

    def __call__(self, x) -> Tensor:
        return tn.linear(x, self.weight, self.bias)


class LayerNorm(Module):
    def __init__(self, dim: int, eps: float = 1e-5):
        self.gain = Param(np.ones(dim))
        self.bias = Param(np.zeros(dim))
        self.eps = eps

    def __call__(self, x) -> Tensor:
        return tn.layernorm(x, self.gain, self.bias, self.eps)


class MLP(Module):
    """Two linear layers with GELU in between."""

    def __init__(self, d_in: int, d_hidden: int, d_out: int, rng: np.random.Generator):
        self.fc1 = Linear(d_in, d_hidden, rng)
        self.fc2 = Linear(d_hidden, d_out, rng)

    def __call__(self, x) -> Tensor:
        return self.fc2(tn.gelu(self.fc1(x)))


def multi_head_attention(q, k, v, heads: int, wq: Linear, wk: Linear, wv: Linear, wo: Linear,
                         key_mask: np.ndarray | None = None) -> Tensor:
    """Scaled dot-product attention split over ``heads``.

    q: (B, Nq, D); k, v: (B, Nk, D). ``key_mask`` (B, Nk) marks real keys
    with True; a query whose keys are all masked attends to nothing and
    gets the output projection of a zero vector.
    """
    q, k, v = tn.as_tensor(q), tn.as_tensor(k), tn.as_tensor(v)
    d_model = q.shape[-1]
    if k.shape[-1] != d_model or v.shape[-1] != d_model:
        raise ConfigurationError(f"attention: model dims differ q={q.shape} k={k.shape} v={v.shape}")
    if d_model % heads:
        raise ConfigurationError(f"attention: d_model={d_model} not divisible by heads={heads}")
    dh = d_model // heads
    b, nq, nk = q.shape[0], q.shape[1], k.shape[1]

    def split(x: Tensor, n: int) -> Tensor:
        return x.reshape(b, n, heads, dh).transpose(0, 2, 1, 3)

    qh = split(wq(q), nq)
    kh = split(wk(k), nk)
    vh = split(wv(v), nk)
    scores = tn.matmul(qh, kh.swapaxes(-1, -2)) * (1.0 / np.sqrt(dh))
    if key_mask is not None:
        live = np.asarray(key_mask, dtype=bool)[:, None, None, :]
        scores = tn.masked_fill_const(scores, ~live, -1e30)
        weights = tn.softmax(scores, axis=-1) * live.astype(np.float64)
    else:
        weights = tn.softmax(scores, axis=-1)
    ctx = tn.matmul(weights, vh).transpose(0, 2, 1, 3).reshape(b, nq, d_model)
    return wo(ctx)


class MultiHeadAttention(Module):
    def __init__(self, d_model: int, heads: int, rng: np.random.Generator):
        if d_model % heads:
            raise ConfigurationError(f"d_model={d_model} not divisible by heads={heads}")
        self.heads = heads
        self.q_proj = Linear(d_model, d_model, rng)
        self.k_proj = Linear(d_model, d_model, rng)
        self.v_proj = Linear(d_model, d_model, rng)
        self.out_proj = Linear(d_model, d_model, rng)

    def __call__(self, q, k, v, key_mask: np.ndarray | None = None) -> Tensor:
        return multi_head_attention(q, k, v, self.heads, self.q_proj, self.k_proj,
                                    self.v_proj, self.out_proj, key_mask)
