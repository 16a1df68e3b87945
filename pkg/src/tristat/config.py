"""Run configuration: a flat ``key=value`` text file mapped onto ``RunConfig``."""
from __future__ import annotations

import dataclasses
import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigurationError
from .model import ModelConfig

ABLATIONS = ("no_trl", "no_srl", "no_vat", "no_adf")

# file keys that differ from attribute names
_ALIASES = {"vat.eta": "eta", "L": "lookback", "T": "horizon"}
_REVERSE = {"eta": "vat.eta"}


@dataclass
class RunConfig:
    dataset: str = "synthetic"
    lookback: int = 96
    horizon: int = 96
    batch_size: int = 32
    lr: float = 1e-3
    max_epochs: int = 10
    patience: int = 3
    seed: int = 0
    no_trl: bool = False
    no_srl: bool = False
    no_vat: bool = False
    no_adf: bool = False
    eta: float = 2.0
    tolerances: tuple[float, float, float] = (0.01, 0.10, 0.50)
    d_model: int = 128
    heads: int = 4
    patch_len: int = 16
    stride: int = 8
    top_k: int = 5
    bank_capacity: int = 256
    embed_dim: int = 64
    svd_rank: int = 4
    aux_patch_len: int = 24
    few_shot: float = 1.0
    registry: str = ""
    embeddings: str = ""
    synthetic_rows: int = 2400
    synthetic_channels: int = 3
    data_seed: int = 0
    codebook_windows: int = 256
    eval_batch_size: int = 64
    extra: dict[str, str] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        checks = [
            (self.lookback >= 1 and self.horizon >= 1, "lookback and horizon must be >= 1"),
            (self.batch_size >= 1, "batch_size must be >= 1"),
            (self.lr > 0, "lr must be positive"),
            (self.max_epochs >= 0, "max_epochs must be >= 0"),
            (self.patience >= 1, "patience must be >= 1"),
            (self.eta > 0, "vat.eta must be positive"),
            (0 < self.few_shot <= 1, "few_shot must lie in (0, 1]"),
            (self.d_model % self.heads == 0, "d_model must be divisible by heads"),
            (self.aux_patch_len >= 2, "aux_patch_len must be >= 2"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigurationError(msg)
        tols = tuple(float(t) for t in self.tolerances)
        if len(tols) != 3 or not (0 < tols[0] < tols[1] < tols[2]):
            raise ConfigurationError(f"tolerances must be three strictly increasing positives, got {tols}")
        self.tolerances = tols

    @property
    def ablations(self) -> tuple[str, ...]:
        return tuple(a for a in ABLATIONS if getattr(self, a))

    def with_ablations(self, names) -> RunConfig:
        names = [n.strip() for n in names if n.strip()]
        unknown = [n for n in names if n not in ABLATIONS]
        if unknown:
            raise ConfigurationError(f"unknown ablation(s) {unknown}; choose from {ABLATIONS}")
        return self.replace(**{n: True for n in names})

    def replace(self, **changes) -> RunConfig:
        return dataclasses.replace(self, **changes)

    def model_config(self, channels: int) -> ModelConfig:
        return ModelConfig(lookback=self.lookback, horizon=self.horizon, channels=channels,
                           d_model=self.d_model, heads=self.heads, patch_len=self.patch_len,
                           stride=self.stride, top_k=self.top_k, bank_capacity=self.bank_capacity,
                           embed_dim=self.embed_dim, eta=self.eta, tolerances=self.tolerances,
                           use_text=not self.no_trl, use_symbolic=not self.no_srl,
                           use_temperature=not self.no_vat)

    # -- serialisation ------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        out = {}
        for f in dataclasses.fields(self):
            if f.name == "extra":
                continue
            out[_REVERSE.get(f.name, f.name)] = getattr(self, f.name)
        return out

    def to_text(self) -> str:
        lines = []
        for key, value in self.to_dict().items():
            if isinstance(value, tuple):
                value = ",".join(repr(v) for v in value)
            elif isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]

    @classmethod
    def from_text(cls, text: str, source: str = "<config>") -> RunConfig:
        types = {f.name: f.type for f in dataclasses.fields(cls)}
        values: dict[str, Any] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{source}:{lineno}: expected key=value, got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            name = _ALIASES.get(key, key)
            if name not in types or name == "extra":
                raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
            values[name] = _coerce(value, types[name], f"{source}:{lineno}")
        return cls(**values)

    @classmethod
    def load(cls, path: str | os.PathLike) -> RunConfig:
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"config file not found: {path}")
        return cls.from_text(path.read_text(encoding="utf-8"), str(path))

    def save(self, path: str | os.PathLike) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")


def _coerce(value: str, typ: str, where: str):
    try:
        if typ == "bool":
            low = value.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if typ == "int":
            return int(value)
        if typ == "float":
            return float(value)
        if typ.startswith("tuple"):
            return tuple(float(v) for v in value.split(","))
        return value
    except ValueError:
        raise ConfigurationError(f"{where}: cannot read {value!r} as {typ}") from None
