"""Training configuration and its flat ``key = value`` file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

VARIANTS = ("full", "baseline1-random-vectors", "baseline2-no-gcn")
SCHEMES = ("A1", "A2", "A3", "A4", "A5")


class ConfigError(ValueError):
    pass


@dataclass
class TrainConfig:
    seed: int = 0
    lr: float = 0.001
    epochs: int = 200
    init_epochs: int = 200
    batch_size: int | None = None
    gamma1: float = 0.9
    gamma2: float = 0.9
    syn_thr: float = 0.15
    ant_thr: float = 0.10
    confidence_band: float = 0.05
    d: int = 300
    p: int = 80
    q: int = 60
    enc_hidden: int = 150
    gcn_hidden: int = 70
    activation: str = "tanh"
    scheme: str = "A5"
    negatives: int = 1
    variant: str = "full"
    patience: int = 20
    cold_start: bool = False
    # fraction of M_init pair scores shuffled before graph construction (ablation noise)
    score_noise: float = 0.0
    oov_seed: int = 0
    word_class: str = "adjective"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.lr <= 0:
            raise ConfigError(f"lr must be positive, got {self.lr}")
        for name in ("d", "p", "q", "enc_hidden", "gcn_hidden", "negatives"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.epochs < 0 or self.init_epochs < 0:
            raise ConfigError("epoch counts must be non-negative")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.activation not in ("sigmoid", "tanh"):
            raise ConfigError(f"activation must be sigmoid or tanh, got {self.activation!r}")
        if not 0.0 <= self.score_noise <= 1.0:
            raise ConfigError("score_noise must lie in [0, 1]")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError("batch_size must be positive or unset")

    def replace(self, **changes) -> "TrainConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def dumps(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {'none' if v is None else v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dict(cls, values: dict) -> "TrainConfig":
        known = {f.name: f for f in fields(cls)}
        out = {}
        for key, raw in values.items():
            key = key.strip().replace("-", "_")
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            out[key] = _coerce(known[key].type, raw, key)
        return cls(**out)

    @classmethod
    def parse(cls, text: str) -> "TrainConfig":
        values = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            sep = "=" if "=" in line else ":" if ":" in line else None
            if sep is None:
                raise ConfigError(f"line {lineno}: expected 'key = value'")
            k, v = line.split(sep, 1)
            values[k.strip()] = v.strip()
        return cls.from_dict(values)

    @classmethod
    def load(cls, path) -> "TrainConfig":
        return cls.parse(Path(path).read_text(encoding="utf-8"))


def _coerce(type_name, raw, key):
    if not isinstance(raw, str):
        return raw
    t = str(type_name)
    if raw.lower() in ("none", "null", "") and "None" in t:
        return None
    try:
        if t.startswith("int"):
            return int(raw)
        if t.startswith("float"):
            return float(raw)
        if t.startswith("bool"):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {t}") from None
    return raw
