"""Frozen token-embedding providers and the shared alignment projection."""
from __future__ import annotations

import hashlib
import os
import re
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError, DataLoadError
from .nn import Linear, Module
from .symbolize import CHANNEL_SEPARATOR
from .tensor import Tensor

OOV_BUCKETS = 1024
MAX_TEXT_TOKENS = 128
PAD = "<pad>"

_WORD_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def tokenize(text: str, symbolic: bool = False) -> list[str]:
    """Split prompt text into lowercase words and punctuation marks.

    In symbolic mode every character is its own token; the channel
    separator is kept as a token and whitespace is dropped.
    """
    if symbolic:
        return [ch for ch in text if not ch.isspace()]
    return _WORD_RE.findall(text.lower())


def _stable_bucket(token: str, seed: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8, salt=seed.to_bytes(8, "little")).digest()
    return int.from_bytes(digest, "little") % OOV_BUCKETS


class EmbeddingProvider:
    """A read-only token -> vector table with hashed rows for unseen tokens.

    Row 0 is the zero padding vector, rows ``1..V`` hold the vocabulary and
    the final ``OOV_BUCKETS`` rows serve out-of-vocabulary tokens.
    """

    def __init__(self, vocab: Sequence[str], matrix: np.ndarray, oov_matrix: np.ndarray, seed: int = 0):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.shape[0] != len(vocab):
            raise ConfigurationError(f"{len(vocab)} tokens but {matrix.shape[0]} rows")
        self.dim = matrix.shape[1]
        self.seed = seed
        self.vocab = {tok: i + 1 for i, tok in enumerate(vocab)}
        self.table = np.vstack([np.zeros((1, self.dim)), matrix, np.asarray(oov_matrix, dtype=np.float64)])
        self.table.setflags(write=False)

    @property
    def oov_policy(self) -> int:
        return OOV_BUCKETS

    @classmethod
    def random(cls, vocab: Iterable[str], dim: int = 64, seed: int = 0) -> EmbeddingProvider:
        vocab = list(dict.fromkeys(vocab))
        rng = np.random.default_rng(seed)
        scale = 1.0 / np.sqrt(dim)
        return cls(vocab, rng.normal(0, scale, (len(vocab), dim)),
                   rng.normal(0, scale, (OOV_BUCKETS, dim)), seed)

    @classmethod
    def from_file(cls, path: str | os.PathLike, seed: int = 0) -> EmbeddingProvider:
        """Load ``V D`` header then ``token v1 .. vD`` lines."""
        path = Path(path)
        if not path.exists():
            raise DataLoadError(f"embedding file not found: {path}")
        with path.open(encoding="utf-8") as fh:
            head = fh.readline().split()
            if len(head) != 2:
                raise DataLoadError(f"{path}: header must be 'V D_emb'")
            v, d = int(head[0]), int(head[1])
            vocab, rows = [], []
            for lineno, line in enumerate(fh, start=2):
                parts = line.rstrip("\n").split(" ")
                if len(parts) != d + 1:
                    raise DataLoadError(f"{path}:{lineno}: expected token and {d} values")
                vocab.append(parts[0])
                rows.append([float(p) for p in parts[1:]])
        if len(vocab) != v:
            raise DataLoadError(f"{path}: header announces {v} tokens, found {len(vocab)}")
        rng = np.random.default_rng(seed)
        return cls(vocab, np.array(rows), rng.normal(0, 1.0 / np.sqrt(d), (OOV_BUCKETS, d)), seed)

    def save(self, path: str | os.PathLike) -> None:
        inv = sorted(self.vocab.items(), key=lambda kv: kv[1])
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{len(inv)} {self.dim}\n")
            for tok, row in inv:
                fh.write(tok + " " + " ".join(repr(float(v)) for v in self.table[row]) + "\n")

    def ids(self, tokens: Sequence[str]) -> np.ndarray:
        base = 1 + len(self.vocab)
        return np.array([self.vocab[t] if t in self.vocab else base + _stable_bucket(t, self.seed)
                         for t in tokens], dtype=np.int64)

    def embed(self, tokens: Sequence[str]) -> np.ndarray:
        """L_tok x D_emb matrix for a token list."""
        return self.table[self.ids(tokens)]

    def lookup(self, ids: np.ndarray) -> np.ndarray:
        return self.table[ids]

    def fingerprint(self) -> str:
        return hashlib.sha256(self.table.tobytes()).hexdigest()


class AlignProjection(Module):
    """Trainable map from provider space to model space, shared by text and symbols."""

    def __init__(self, d_emb: int, d_model: int, rng: np.random.Generator):
        self.proj = Linear(d_emb, d_model, rng)
        self.d_emb = d_emb

    def __call__(self, emb) -> Tensor:
        shape = emb.shape
        if shape[-1] != self.d_emb:
            raise ConfigurationError(f"align: embedding dim {shape[-1]} != projection input {self.d_emb}")
        return self.proj(emb)


def encode_text(text: str, provider: EmbeddingProvider, max_tokens: int = MAX_TEXT_TOKENS) -> np.ndarray:
    return provider.ids(tokenize(text)[:max_tokens])


def encode_symbols(per_channel: Sequence[str], provider: EmbeddingProvider) -> np.ndarray:
    joined = CHANNEL_SEPARATOR.join(per_channel)
    return provider.ids(tokenize(joined, symbolic=True))


def pad_ids(seqs: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Right-pad id sequences with 0; returns (ids, mask) both (B, max_len)."""
    width = max(1, max((len(s) for s in seqs), default=0))
    ids = np.zeros((len(seqs), width), dtype=np.int64)
    mask = np.zeros((len(seqs), width), dtype=bool)
    for i, s in enumerate(seqs):
        ids[i, :len(s)] = s
        mask[i, :len(s)] = True
    return ids, mask
