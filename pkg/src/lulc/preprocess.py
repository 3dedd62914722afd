"""Contrast stretching, sigmoid normalization and histogram equalization."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .ingest import Image


@dataclass(frozen=True)
class NormalizationSpec:
    mode: Literal["min_max", "sigmoid"] = "min_max"
    new_min: float = 0.0
    new_max: float = 255.0
    alpha: float = 32.0
    beta: float = 127.5

    def __post_init__(self) -> None:
        if self.mode not in ("min_max", "sigmoid"):
            raise ValueError(f"unknown normalization mode {self.mode!r}")
        if not self.new_max > self.new_min:
            raise ValueError("new_max must exceed new_min")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")


def normalize_min_max(img: Image, spec: NormalizationSpec) -> Image:
    """Linear contrast stretch of every channel onto ``[new_min, new_max]``.

    Each channel uses its own observed extremes. A constant channel maps to
    ``new_min``.
    """
    if spec.mode != "min_max":
        raise ValueError("spec.mode must be 'min_max'")
    x = img.data
    lo = x.min(axis=(0, 1), keepdims=True)
    hi = x.max(axis=(0, 1), keepdims=True)
    span = hi - lo
    flat = span == 0
    scale = (spec.new_max - spec.new_min) / np.where(flat, 1.0, span)
    out = (x - lo) * scale + spec.new_min
    out = np.where(flat, spec.new_min, out)
    # float round-off can overshoot the target bounds by one ulp
    out = np.clip(out, spec.new_min, spec.new_max)
    return Image(out, (spec.new_min, spec.new_max))


def normalize_sigmoid(img: Image, spec: NormalizationSpec) -> Image:
    if spec.mode != "sigmoid":
        raise ValueError("spec.mode must be 'sigmoid'")
    z = (img.data - spec.beta) / spec.alpha
    # 1/(1+exp(-z)) without overflow for large negative z
    e = np.exp(-np.abs(z))
    s = np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    out = (spec.new_max - spec.new_min) * s + spec.new_min
    return Image(np.clip(out, spec.new_min, spec.new_max), (spec.new_min, spec.new_max))


def normalize(img: Image, spec: NormalizationSpec) -> Image:
    if spec.mode == "min_max":
        return normalize_min_max(img, spec)
    return normalize_sigmoid(img, spec)


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5)


def equalize_histogram(img: Image) -> Image:
    """Per-channel global histogram equalization of an 8-bit image.

    ``out(v) = round(255 * (cdf(v) - cdf_min) / (H*W - cdf_min))``; a channel
    holding a single intensity is returned unchanged.
    """
    if img.value_range != (0.0, 255.0):
        raise ValueError(f"equalization needs value_range (0, 255), got {img.value_range}")
    x = img.data
    if np.any(x != np.round(x)):
        raise ValueError("equalization needs integer-valued intensities")
    levels = x.astype(np.int64)
    n_pix = img.height * img.width
    out = np.empty_like(x)
    for k in range(img.channels):
        ch = levels[:, :, k]
        cdf = np.cumsum(np.bincount(ch.ravel(), minlength=256))
        cdf_min = cdf[ch.min()]
        if cdf_min == n_pix:
            out[:, :, k] = ch
            continue
        lut = _round_half_up(255.0 * (cdf - cdf_min) / (n_pix - cdf_min))
        out[:, :, k] = lut[ch]
    return Image(out, (0.0, 255.0))


def requantize_8bit(img: Image) -> Image:
    """Map ``img`` linearly from its value_range onto integer levels 0..255."""
    lo, hi = img.value_range
    if hi == lo:
        return Image(np.zeros_like(img.data), (0.0, 255.0))
    q = _round_half_up((img.data - lo) / (hi - lo) * 255.0)
    return Image(np.clip(q, 0.0, 255.0), (0.0, 255.0))


def preprocess(img: Image, norm: NormalizationSpec | None = NormalizationSpec(), equalize: bool = True) -> Image:
    """Canonical pipeline order: normalize, then equalize an 8-bit requantization."""
    if norm is not None:
        img = normalize(img, norm)
    if equalize:
        img = equalize_histogram(requantize_8bit(img))
    return img
