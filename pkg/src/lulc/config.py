"""Flat ``section.key = value`` pipeline configuration.

Unknown keys are errors. Stage seeds (``swarm.seed``, ``train.seed``,
``split.seed``) inherit ``run.seed`` unless set explicitly.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .errors import ConfigError
from .features import FeatureSpecs, GaborBankSpec, GlcmSpec, HogSpec, LgbphsSpec
from .hgpso import SwarmConfig
from .ingest import SplitSpec
from .lstm import TrainConfig
from .preprocess import NormalizationSpec


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip())


def _offsets(text: str) -> tuple[tuple[int, int], ...]:
    out = []
    for item in text.split(","):
        if not item.strip():
            continue
        dy, _, dx = item.partition(":")
        out.append((int(dy), int(dx)))
    return tuple(out)


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple) and value and isinstance(value[0], tuple):
        return ",".join(f"{a}:{b}" for a, b in value)
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    return str(value)


INHERIT = None  # marker: take the value of run.seed

# key -> (parser, default)
KEYS: dict[str, tuple[Callable[[str], Any], Any]] = {
    "run.seed": (int, 0),
    "run.out": (str, "lulc_out"),
    "run.skip_select": (_bool, False),
    "dataset.source": (str, "directory"),
    "dataset.path": (str, ""),
    "dataset.manifest": (str, ""),
    "normalize.enabled": (_bool, True),
    "normalize.mode": (str, "min_max"),
    "normalize.new_min": (float, 0.0),
    "normalize.new_max": (float, 255.0),
    "normalize.alpha": (float, 32.0),
    "normalize.beta": (float, 127.5),
    "equalize.enabled": (_bool, True),
    "hog.cell_size": (int, 7),
    "hog.block_size": (int, 2),
    "hog.block_stride": (int, 1),
    "hog.bins": (int, 9),
    "hog.signed": (_bool, False),
    "hog.epsilon": (float, 1e-5),
    "gabor.scales": (int, 5),
    "gabor.orientations": (int, 8),
    "gabor.wavelengths": (_floats, (4.0, 8.0, 16.0, 32.0, 64.0)),
    "gabor.sigma_ratio": (float, 0.56),
    "gabor.kernel_size": (int, 11),
    "lgbphs.grid_rows": (int, 2),
    "lgbphs.grid_cols": (int, 2),
    "lgbphs.lbp_bins": (int, 256),
    "glcm.levels": (int, 16),
    "glcm.offsets": (_offsets, ((0, 1), (1, 0), (1, 1), (1, -1))),
    "glcm.symmetric": (_bool, True),
    "glcm.normalized": (_bool, True),
    "swarm.swarm_size": (int, 30),
    "swarm.archive_size": (int, 20),
    "swarm.max_iterations": (int, 100),
    "swarm.inertia": (float, 0.7),
    "swarm.seed": (int, INHERIT),
    "swarm.knowledge_prob": (float, 0.8),
    "swarm.interaction_count": (int, 4),
    "swarm.v_max": (float, 2.0),
    "swarm.p_max": (float, 6.0),
    "swarm.fitness_mode": (str, "wrapper"),
    "swarm.optimizer": (str, "full"),
    "swarm.val_fraction": (float, 0.3),
    "train.epochs": (int, 30),
    "train.batch_size": (int, 32),
    "train.learning_rate": (float, 1e-3),
    "train.seed": (int, INHERIT),
    "train.gradient_clip": (float, 5.0),
    "train.optimizer": (str, "adaptive_moment"),
    "train.momentum": (float, 0.9),
    "train.hidden_dim": (int, 32),
    "train.timesteps": (int, 4),
    "split.train_fraction": (float, 0.7),
    "split.seed": (int, INHERIT),
    "split.stratified": (_bool, True),
}

SEED_KEYS = ("swarm.seed", "train.seed", "split.seed")


@dataclass
class PipelineConfig:
    values: dict[str, Any] = field(default_factory=lambda: {k: d for k, (_, d) in KEYS.items()})

    def __post_init__(self) -> None:
        unknown = set(self.values) - set(KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        self.values = {**{k: d for k, (_, d) in KEYS.items()}, **self.values}
        try:
            self.normalization
            self.features
            self.swarm
            self.train
            self.split
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from exc
        if self.hidden_dim < 1 or self.timesteps < 1:
            raise ConfigError("train.hidden_dim and train.timesteps must be >= 1")
        if self.values["run.seed"] < 0:
            raise ConfigError("run.seed must be a non-negative integer")
        if self.values["dataset.source"] not in ("directory", "raw"):
            raise ConfigError(f"dataset.source must be 'directory' or 'raw', got {self.values['dataset.source']!r}")

    # --- construction ------------------------------------------------------

    @classmethod
    def from_text(cls, text: str, origin: str = "<config>") -> "PipelineConfig":
        values: dict[str, Any] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if not sep or not key:
                raise ConfigError(f"{origin}:{lineno}: expected 'key = value'")
            if key not in KEYS:
                raise ConfigError(f"{origin}:{lineno}: unknown key {key!r}")
            try:
                values[key] = KEYS[key][0](val)
            except ValueError as exc:
                raise ConfigError(f"{origin}:{lineno}: bad value for {key}: {exc}") from exc
        return cls(values)

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "PipelineConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config ({exc})") from exc
        return cls.from_text(text, str(path))

    def with_overrides(self, **overrides: Any) -> "PipelineConfig":
        """Copy with dotted keys given as ``section__key=value``."""
        vals = dict(self.values)
        for k, v in overrides.items():
            vals[k.replace("__", ".")] = v
        return PipelineConfig(vals)

    def to_text(self) -> str:
        """Effective configuration with every default and inherited seed resolved."""
        lines = []
        for key in KEYS:
            val = self.seed_for(key) if key in SEED_KEYS else self.values[key]
            lines.append(f"{key} = {_fmt(val)}")
        return "\n".join(lines) + "\n"

    # --- typed views -------------------------------------------------------

    def seed_for(self, key: str) -> int:
        v = self.values[key]
        return self.values["run.seed"] if v is INHERIT else v

    @property
    def normalization(self) -> NormalizationSpec | None:
        v = self.values
        if not v["normalize.enabled"]:
            return None
        return NormalizationSpec(
            v["normalize.mode"], v["normalize.new_min"], v["normalize.new_max"],
            v["normalize.alpha"], v["normalize.beta"],
        )

    @property
    def equalize(self) -> bool:
        return self.values["equalize.enabled"]

    @property
    def features(self) -> FeatureSpecs:
        v = self.values
        return FeatureSpecs(
            hog=HogSpec(v["hog.cell_size"], v["hog.block_size"], v["hog.block_stride"],
                        v["hog.bins"], v["hog.signed"], v["hog.epsilon"]),
            gabor=GaborBankSpec(v["gabor.scales"], v["gabor.orientations"], v["gabor.wavelengths"],
                                v["gabor.sigma_ratio"], v["gabor.kernel_size"]),
            lgbphs=LgbphsSpec(v["lgbphs.grid_rows"], v["lgbphs.grid_cols"], v["lgbphs.lbp_bins"]),
            glcm=GlcmSpec(v["glcm.levels"], v["glcm.offsets"], v["glcm.symmetric"], v["glcm.normalized"]),
        )

    @property
    def swarm(self) -> SwarmConfig:
        v = self.values
        return SwarmConfig(
            swarm_size=v["swarm.swarm_size"], archive_size=v["swarm.archive_size"],
            max_iterations=v["swarm.max_iterations"], inertia=v["swarm.inertia"],
            seed=self.seed_for("swarm.seed"), knowledge_prob=v["swarm.knowledge_prob"],
            interaction_count=v["swarm.interaction_count"], v_max=v["swarm.v_max"],
            p_max=v["swarm.p_max"], fitness_mode=v["swarm.fitness_mode"],
            optimizer=v["swarm.optimizer"], val_fraction=v["swarm.val_fraction"],
        )

    @property
    def train(self) -> TrainConfig:
        v = self.values
        return TrainConfig(
            epochs=v["train.epochs"], batch_size=v["train.batch_size"],
            learning_rate=v["train.learning_rate"], seed=self.seed_for("train.seed"),
            gradient_clip=v["train.gradient_clip"], optimizer=v["train.optimizer"],
            momentum=v["train.momentum"],
        )

    @property
    def hidden_dim(self) -> int:
        return self.values["train.hidden_dim"]

    @property
    def timesteps(self) -> int:
        return self.values["train.timesteps"]

    @property
    def split(self) -> SplitSpec:
        v = self.values
        return SplitSpec(v["split.train_fraction"], self.seed_for("split.seed"), v["split.stratified"])
