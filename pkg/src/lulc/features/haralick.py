"""Gray-level co-occurrence matrices and Haralick texture statistics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..ingest import Image

HARALICK_NAMES = (
    "energy",
    "entropy",
    "correlation",
    "angular_second_moment",
    "inverse_difference_moment",
    "contrast",
    "homogeneity",
)

# below this weighted variance the correlation is reported as 0
VARIANCE_FLOOR = 1e-15


def _default_offsets() -> tuple[tuple[int, int], ...]:
    return ((0, 1), (1, 0), (1, 1), (1, -1))


@dataclass(frozen=True)
class GlcmSpec:
    levels: int = 16
    offsets: tuple[tuple[int, int], ...] = field(default_factory=_default_offsets)
    symmetric: bool = True
    normalized: bool = True

    def __post_init__(self) -> None:
        offs = tuple((int(dy), int(dx)) for dy, dx in self.offsets)
        object.__setattr__(self, "offsets", offs)
        if self.levels < 2:
            raise ValueError("GLCM needs at least 2 gray levels")
        if not offs:
            raise ValueError("GLCM needs at least one offset")
        if (0, 0) in offs:
            raise ValueError("offset (0, 0) is not allowed")


def quantize(field: np.ndarray, value_range: tuple[float, float], levels: int) -> np.ndarray:
    """Uniform binning of ``value_range`` into ``levels`` integer levels."""
    lo, hi = value_range
    if hi == lo:
        return np.zeros(np.shape(field), dtype=np.int64)
    q = np.floor((np.asarray(field, dtype=np.float64) - lo) / (hi - lo) * levels).astype(np.int64)
    return np.clip(q, 0, levels - 1)


def glcm_from_levels(q: np.ndarray, spec: GlcmSpec) -> np.ndarray:
    """Co-occurrence matrix of an already-quantized field, averaged over offsets."""
    q = np.asarray(q, dtype=np.int64)
    h, w = q.shape
    n = spec.levels
    acc = np.zeros((n, n), dtype=np.float64)
    for dy, dx in spec.offsets:
        r0, r1 = max(0, -dy), min(h, h - dy)
        c0, c1 = max(0, -dx), min(w, w - dx)
        if r1 <= r0 or c1 <= c0:
            raise ValueError(f"image {h}x{w} contains no pixel pair at offset ({dy}, {dx})")
        a = q[r0:r1, c0:c1]
        b = q[r0 + dy : r1 + dy, c0 + dx : c1 + dx]
        m = np.bincount((a * n + b).ravel(), minlength=n * n).astype(np.float64).reshape(n, n)
        if spec.symmetric:
            m = m + m.T
        if spec.normalized:
            m /= m.sum()
        acc += m
    return acc / len(spec.offsets)


def glcm(img: Image, spec: GlcmSpec = GlcmSpec(), channel: int = 0) -> np.ndarray:
    """GLCM of one channel of ``img`` after quantizing its value_range."""
    return glcm_from_levels(quantize(img.channel(channel), img.value_range, spec.levels), spec)


def haralick_features(p: np.ndarray) -> np.ndarray:
    """The seven statistics, in :data:`HARALICK_NAMES` order, of a normalized GLCM.

    Entropy uses log base 2 with the usual negative sign; correlation uses
    the row-weighted mean and variance and is 0 when that variance vanishes.
    """
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError(f"GLCM must be square, got {p.shape}")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("GLCM must be normalized (non-negative, summing to 1)")
    n = p.shape[0]
    g = np.arange(n, dtype=np.float64)
    gi, gj = g[:, None], g[None, :]
    diff = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])

    asm = float(np.sum(p * p))
    nz = p[p > 0]
    entropy = float(-np.sum(nz * np.log2(nz)))
    mu = float(np.sum(gi * p))
    var = float(np.sum((gi - mu) ** 2 * p))
    corr = 0.0 if var <= VARIANCE_FLOOR else float(np.sum((gi - mu) * (gj - mu) * p) / var)
    inv = float(np.sum(p / (1.0 + (gi - gj) ** 2)))
    by_diff = np.bincount(diff.ravel(), weights=p.ravel(), minlength=n)
    contrast = float(np.sum(np.arange(n, dtype=np.float64) ** 2 * by_diff))
    return np.array([asm, entropy, corr, asm, inv, contrast, inv])


def haralick_per_channel(img: Image, spec: GlcmSpec = GlcmSpec()) -> np.ndarray:
    """7 x channels values, channel-major."""
    out = []
    for k in range(img.channels):
        p = glcm(img, spec, k)
        if not spec.normalized:
            p = p / p.sum()
        out.append(haralick_features(p))
    return np.concatenate(out)
