"""Histogram of oriented gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ingest import Image


@dataclass(frozen=True)
class HogSpec:
    cell_size: int = 7
    block_size: int = 2
    block_stride: int = 1
    bins: int = 9
    signed: bool = False
    epsilon: float = 1e-5

    def __post_init__(self) -> None:
        if min(self.cell_size, self.block_size, self.block_stride) < 1:
            raise ValueError("HOG sizes must be >= 1")
        if self.bins < 2:
            raise ValueError("HOG needs at least 2 orientation bins")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    def grid(self, height: int, width: int) -> tuple[int, int, int, int]:
        """(cells_y, cells_x, blocks_y, blocks_x) for an image of the given size."""
        cy, cx = height // self.cell_size, width // self.cell_size
        if cy < self.block_size or cx < self.block_size:
            raise ValueError(
                f"image {height}x{width} smaller than one HOG block "
                f"({self.block_size}x{self.block_size} cells of {self.cell_size}px)"
            )
        by = (cy - self.block_size) // self.block_stride + 1
        bx = (cx - self.block_size) // self.block_stride + 1
        return cy, cx, by, bx

    def length(self, height: int, width: int) -> int:
        _, _, by, bx = self.grid(height, width)
        return by * bx * self.block_size**2 * self.bins


def luminance(img: Image) -> np.ndarray:
    """Single-channel field: mean over channels."""
    return img.data.mean(axis=2)


def gradients(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Centered differences ``[-1, 0, 1]`` along x (columns) and y (rows).

    Borders use edge replication.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 2 or u.shape[0] < 3 or u.shape[1] < 3:
        raise ValueError(f"gradient field must be at least 3x3, got {u.shape}")
    p = np.pad(u, 1, mode="edge")
    lx = p[1:-1, 2:] - p[1:-1, :-2]
    ly = p[2:, 1:-1] - p[:-2, 1:-1]
    return lx, ly


def gradient_magnitude_orientation(
    lx: np.ndarray, ly: np.ndarray, signed: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Magnitude and orientation in degrees, ``[0, 180)`` unsigned or ``[0, 360)`` signed."""
    lx = np.asarray(lx, dtype=np.float64)
    ly = np.asarray(ly, dtype=np.float64)
    if lx.shape != ly.shape:
        raise ValueError(f"gradient shapes differ: {lx.shape} vs {ly.shape}")
    mag = np.hypot(lx, ly)
    period = 360.0 if signed else 180.0
    theta = np.mod(np.degrees(np.arctan2(ly, lx)), period)
    theta[theta >= period] -= period
    return mag, theta


def cell_histograms(u: np.ndarray, spec: HogSpec) -> np.ndarray:
    """Magnitude-weighted orientation histograms, shape (cells_y, cells_x, bins).

    Bin ``b`` is centred on ``b * period / bins``; each vote is split linearly
    between the two nearest centres (wrapping around the period).
    """
    cy, cx, _, _ = spec.grid(*u.shape)
    mag, theta = gradient_magnitude_orientation(*gradients(u), signed=spec.signed)
    cs = spec.cell_size
    mag = mag[: cy * cs, : cx * cs]
    theta = theta[: cy * cs, : cx * cs]

    width = (360.0 if spec.signed else 180.0) / spec.bins
    pos = theta / width
    lo_f = np.floor(pos)
    frac = pos - lo_f
    lo = lo_f.astype(np.int64) % spec.bins
    hi = (lo + 1) % spec.bins

    rows = np.arange(cy * cs) // cs
    cols = np.arange(cx * cs) // cs
    cell = (rows[:, None] * cx + cols[None, :]) * spec.bins
    size = cy * cx * spec.bins
    hist = np.bincount((cell + lo).ravel(), weights=(mag * (1.0 - frac)).ravel(), minlength=size)
    hist += np.bincount((cell + hi).ravel(), weights=(mag * frac).ravel(), minlength=size)
    return hist.reshape(cy, cx, spec.bins)


def block_vectors(hist: np.ndarray, spec: HogSpec) -> np.ndarray:
    """Unnormalized block vectors, shape (n_blocks, block_size**2 * bins)."""
    cy, cx, _ = hist.shape
    b, s = spec.block_size, spec.block_stride
    blocks = [
        hist[y : y + b, x : x + b].ravel()
        for y in range(0, cy - b + 1, s)
        for x in range(0, cx - b + 1, s)
    ]
    return np.stack(blocks)


def hog_descriptor(img: Image | np.ndarray, spec: HogSpec = HogSpec()) -> np.ndarray:
    """L2-normalized HOG descriptor: ``f = q / sqrt(||q||^2 + e^2)`` per block."""
    u = luminance(img) if isinstance(img, Image) else np.asarray(img, dtype=np.float64)
    q = block_vectors(cell_histograms(u, spec), spec)
    norms = np.sqrt(np.einsum("ij,ij->i", q, q) + spec.epsilon**2)
    return (q / norms[:, None]).ravel()
