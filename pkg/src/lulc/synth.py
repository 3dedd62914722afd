"""Seeded synthetic texture corpus: checkerboards, stripes and noise at class-specific periods."""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .ingest import Image, LabeledDataset

CLASS_NAMES = ("checker", "hstripes", "noise", "vstripes")
SYNTH_STREAM = 7


def _pattern(kind: str, size: int, rng: np.random.Generator) -> np.ndarray:
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    if kind == "checker":
        period = rng.uniform(6.0, 9.0)
        phase = rng.uniform(0, period, 2)
        base = ((np.floor((x + phase[0]) / period * 2) + np.floor((y + phase[1]) / period * 2)) % 2) * 2 - 1
    elif kind == "hstripes":
        period = rng.uniform(4.0, 7.0)
        tilt = rng.uniform(-0.15, 0.15)
        base = np.sin(2 * np.pi * (y + tilt * x) / period + rng.uniform(0, 2 * np.pi))
    elif kind == "vstripes":
        period = rng.uniform(7.0, 11.0)
        tilt = rng.uniform(-0.15, 0.15)
        base = np.sin(2 * np.pi * (x + tilt * y) / period + rng.uniform(0, 2 * np.pi))
    elif kind == "noise":
        coarse = rng.normal(size=(size // 4 + 2, size // 4 + 2))
        base = np.kron(coarse, np.ones((4, 4)))[:size, :size]
        base = base / (np.abs(base).max() + 1e-12)
    else:
        raise ValueError(f"unknown texture kind {kind!r}")
    return base


def synth_image(kind: str, size: int, channels: int, rng: np.random.Generator) -> np.ndarray:
    """One 8-bit image as a (size, size, channels) float array of integers."""
    base = _pattern(kind, size, rng)
    contrast = rng.uniform(15.0, 60.0)
    brightness = rng.uniform(90.0, 165.0)
    tint = rng.uniform(0.8, 1.2, channels)
    img = brightness + contrast * base[:, :, None] * tint[None, None, :]
    img = img + rng.normal(0.0, 30.0, img.shape)
    return np.clip(np.round(img), 0, 255)


def synth_dataset(per_class: int = 200, size: int = 28, channels: int = 3, seed: int = 0) -> LabeledDataset:
    if per_class < 1 or size < 4 or not 1 <= channels <= 4:
        raise ValueError("need per_class >= 1, size >= 4 and 1..4 channels")
    images, labels = [], []
    for label, kind in enumerate(CLASS_NAMES):
        for i in range(per_class):
            rng = np.random.default_rng([seed, SYNTH_STREAM, label, i])
            images.append(Image(synth_image(kind, size, channels, rng), (0.0, 255.0)))
            labels.append(label)
    return LabeledDataset(images, labels, list(CLASS_NAMES))


_MODES = {1: "L", 2: "LA", 3: "RGB", 4: "RGBA"}


def write_png_tree(ds: LabeledDataset, root: str | os.PathLike) -> None:
    """Write ``root/<class>/<class>_<index>.png`` for every image."""
    root = Path(root)
    counters: dict[int, int] = {}
    for img, lab in zip(ds.images, ds.labels):
        name = ds.class_names[lab]
        k = counters.get(lab, 0)
        counters[lab] = k + 1
        d = root / name
        d.mkdir(parents=True, exist_ok=True)
        arr = img.data.astype(np.uint8)
        mode = _MODES[img.channels]
        pil = PILImage.fromarray(arr[:, :, 0] if img.channels == 1 else arr, mode=mode)
        pil.save(d / f"{name}_{k:04d}.png", format="PNG", optimize=False)
