"""Run configuration: a plain ``key = value`` INI file, hashed into every artifact."""
from __future__ import annotations

import configparser
import hashlib
import io
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .models import TrainConfig

DEFAULT_SEED = 1
DEFAULT_SWEEP_SEEDS = (1, 2, 3, 4, 5)
OUT_ENV = "DUALSYLL_OUT"


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in str(text).replace(";", ",").split(",") if v.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in str(text).replace(";", ",").split(",") if v.strip())


@dataclass(frozen=True)
class RunConfig:
    data: str = ""
    out: str = "runs/default"
    seed: int = DEFAULT_SEED
    lr: float = 1e-3
    epochs: int = 4000
    loss_weights: tuple[float, float] = (0.5, 0.5)
    k: int = 5
    resamples: int = 5000
    test_fraction: float = 0.2
    seeds: tuple[int, ...] = field(default=DEFAULT_SWEEP_SEEDS)

    def __post_init__(self):
        try:
            self.train_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.k < 2:
            raise ConfigError("k must be >= 2")
        if self.resamples < 1:
            raise ConfigError("resamples must be >= 1")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must lie in (0, 1)")
        if not self.seeds:
            raise ConfigError("at least one sweep seed is required")

    def train_config(self, seed: int | None = None) -> TrainConfig:
        return TrainConfig(lr=self.lr, epochs=self.epochs,
                           loss_weights=tuple(self.loss_weights),
                           seed=self.seed if seed is None else seed)

    def to_ini(self, include_paths: bool = True) -> str:
        cp = configparser.ConfigParser()
        if include_paths:
            cp["data"] = {"path": self.data}
            cp["output"] = {"dir": self.out}
        cp["train"] = {
            "seed": str(self.seed),
            "lr": repr(float(self.lr)),
            "epochs": str(self.epochs),
            "loss_weights": ",".join(repr(float(w)) for w in self.loss_weights),
        }
        cp["cv"] = {"k": str(self.k), "resamples": str(self.resamples)}
        cp["canonical"] = {"test_fraction": repr(float(self.test_fraction))}
        cp["sweep"] = {"seeds": ",".join(str(s) for s in self.seeds)}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser()
        try:
            cp.read_string(text)
            kw = {}
            if cp.has_option("data", "path"):
                kw["data"] = cp.get("data", "path")
            if cp.has_option("output", "dir"):
                kw["out"] = cp.get("output", "dir")
            if cp.has_section("train"):
                t = cp["train"]
                if "seed" in t:
                    kw["seed"] = t.getint("seed")
                if "lr" in t:
                    kw["lr"] = t.getfloat("lr")
                if "epochs" in t:
                    kw["epochs"] = t.getint("epochs")
                if "loss_weights" in t:
                    kw["loss_weights"] = _floats(t["loss_weights"])
            if cp.has_option("cv", "k"):
                kw["k"] = cp.getint("cv", "k")
            if cp.has_option("cv", "resamples"):
                kw["resamples"] = cp.getint("cv", "resamples")
            if cp.has_option("canonical", "test_fraction"):
                kw["test_fraction"] = cp.getfloat("canonical", "test_fraction")
            if cp.has_option("sweep", "seeds"):
                kw["seeds"] = _ints(cp.get("sweep", "seeds"))
        except (configparser.Error, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from None
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            return cls.from_ini(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None

    def updated(self, **overrides) -> "RunConfig":
        known = {f.name for f in fields(self)}
        return replace(self, **{k: v for k, v in overrides.items() if k in known and v is not None})

    def with_env(self) -> "RunConfig":
        """Apply the output-directory environment override, if set."""
        out = os.environ.get(OUT_ENV)
        return replace(self, out=out) if out else self

    def hash(self) -> str:
        """sha256 over the path-free config text plus the data file's bytes."""
        h = hashlib.sha256(self.to_ini(include_paths=False).encode())
        if self.data and Path(self.data).is_file():
            h.update(hashlib.sha256(Path(self.data).read_bytes()).digest())
        return h.hexdigest()[:16]
