"""Local Gabor binary pattern histogram sequence (LGBPHS)."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..ingest import Image
from .hog import luminance

# clockwise from top-left; neighbour k sets bit 2**k
LBP_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))


def _default_wavelengths() -> tuple[float, ...]:
    return tuple(4.0 * 2**s for s in range(5))


@dataclass(frozen=True)
class GaborBankSpec:
    scales: int = 5
    orientations: int = 8
    wavelengths: tuple[float, ...] = field(default_factory=_default_wavelengths)
    sigma_ratio: float = 0.56
    kernel_size: int = 11

    def __post_init__(self) -> None:
        object.__setattr__(self, "wavelengths", tuple(float(w) for w in self.wavelengths))
        if self.scales < 1 or self.orientations < 1:
            raise ValueError("scales and orientations must be >= 1")
        if len(self.wavelengths) != self.scales:
            raise ValueError(f"{len(self.wavelengths)} wavelengths for {self.scales} scales")
        if any(w <= 0 for w in self.wavelengths) or self.sigma_ratio <= 0:
            raise ValueError("wavelengths and sigma_ratio must be positive")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ValueError(f"kernel_size must be odd, got {self.kernel_size}")

    @property
    def n_kernels(self) -> int:
        return self.scales * self.orientations


@dataclass(frozen=True)
class LgbphsSpec:
    grid_rows: int = 2
    grid_cols: int = 2
    lbp_bins: int = 256

    def __post_init__(self) -> None:
        if self.grid_rows < 1 or self.grid_cols < 1:
            raise ValueError("grid dimensions must be >= 1")
        if not 1 <= self.lbp_bins <= 256:
            raise ValueError("lbp_bins must lie in 1..256")


def gabor_kernel(wavelength: float, theta: float, sigma: float, size: int) -> np.ndarray:
    half = size // 2
    y, x = np.mgrid[-half : half + 1, -half : half + 1].astype(np.float64)
    xr = x * np.cos(theta) + y * np.sin(theta)
    envelope = np.exp(-(x**2 + y**2) / (2.0 * sigma**2))
    k = envelope * np.exp(1j * 2.0 * np.pi * xr / wavelength)
    # zero-DC: the imaginary part is odd and already sums to ~0
    return (k.real - k.real.mean()) + 1j * k.imag


@lru_cache(maxsize=8)
def _bank(spec: GaborBankSpec) -> tuple[np.ndarray, ...]:
    kernels = []
    for lam in spec.wavelengths:
        for o in range(spec.orientations):
            theta = o * np.pi / spec.orientations
            kernels.append(gabor_kernel(lam, theta, spec.sigma_ratio * lam, spec.kernel_size))
    for k in kernels:
        k.setflags(write=False)
    return tuple(kernels)


def gabor_bank(spec: GaborBankSpec = GaborBankSpec()) -> list[np.ndarray]:
    """Complex kernels ordered scale-major, orientation ``k * 180 / orientations`` degrees."""
    return list(_bank(spec))


def gabor_magnitudes(u: np.ndarray, spec: GaborBankSpec) -> np.ndarray:
    """Gabor magnitude pictures, shape (n_kernels, H, W), reflect-padded 'same' filtering."""
    u = np.asarray(u, dtype=np.float64)
    # kernels are zero-DC, so removing the mean only strips round-off;
    # a constant field then gives exactly zero response
    u = np.zeros_like(u) if np.ptp(u) == 0 else u - u.mean()
    half = spec.kernel_size // 2
    pad_mode = "reflect" if min(u.shape) > half else "symmetric"
    padded = np.pad(u, half, mode=pad_mode)
    win = sliding_window_view(padded, (spec.kernel_size, spec.kernel_size))
    h, w = u.shape
    win = win.reshape(h * w, -1)
    bank = np.stack([k.ravel() for k in _bank(spec)])
    resp = win @ np.concatenate([bank.real, bank.imag]).T
    n = spec.n_kernels
    mag = np.hypot(resp[:, :n], resp[:, n:])
    return np.ascontiguousarray(mag.T).reshape(n, h, w)


def lbp_map(field: np.ndarray) -> np.ndarray:
    """8-neighbour radius-1 LBP codes of the interior, shape (..., H-2, W-2).

    A neighbour >= centre sets its bit. Leading axes are treated as a batch.
    """
    f = np.asarray(field, dtype=np.float64)
    if f.ndim < 2 or f.shape[-2] < 3 or f.shape[-1] < 3:
        raise ValueError(f"LBP needs a field of at least 3x3, got {f.shape}")
    h, w = f.shape[-2:]
    center = f[..., 1 : h - 1, 1 : w - 1]
    codes = np.zeros(center.shape, dtype=np.int64)
    for bit, (dy, dx) in enumerate(LBP_OFFSETS):
        nb = f[..., 1 + dy : h - 1 + dy, 1 + dx : w - 1 + dx]
        codes |= (nb >= center).astype(np.int64) << bit
    return codes.astype(np.uint8)


def _region_index(h: int, w: int, spec: LgbphsSpec) -> np.ndarray:
    rows = (np.arange(h) * spec.grid_rows) // h
    cols = (np.arange(w) * spec.grid_cols) // w
    return rows[:, None] * spec.grid_cols + cols[None, :]


def lgbphs_length(gspec: GaborBankSpec, lspec: LgbphsSpec) -> int:
    return gspec.n_kernels * lspec.grid_rows * lspec.grid_cols * lspec.lbp_bins


def lgbphs_descriptor(
    img: Image | np.ndarray,
    gspec: GaborBankSpec = GaborBankSpec(),
    lspec: LgbphsSpec = LgbphsSpec(),
) -> np.ndarray:
    """Concatenated L1-normalized regional LBP histograms over all Gabor magnitude pictures.

    Order is (kernel, region row, region column, bin).
    """
    u = luminance(img) if isinstance(img, Image) else np.asarray(img, dtype=np.float64)
    h, w = u.shape
    if h // lspec.grid_rows < 3 or w // lspec.grid_cols < 3:
        raise ValueError(
            f"image {h}x{w} too small for a {lspec.grid_rows}x{lspec.grid_cols} grid of >= 3x3 cells"
        )
    codes = lbp_map(gabor_magnitudes(u, gspec)).astype(np.int64)
    if lspec.lbp_bins != 256:
        codes = codes * lspec.lbp_bins // 256
    n_k = codes.shape[0]
    n_regions = lspec.grid_rows * lspec.grid_cols
    region = _region_index(codes.shape[1], codes.shape[2], lspec)
    idx = (np.arange(n_k)[:, None, None] * n_regions + region[None]) * lspec.lbp_bins + codes
    hist = np.bincount(idx.ravel(), minlength=n_k * n_regions * lspec.lbp_bins).astype(np.float64)
    hist = hist.reshape(n_k * n_regions, lspec.lbp_bins)
    totals = hist.sum(axis=1, keepdims=True)
    hist = np.divide(hist, totals, out=np.zeros_like(hist), where=totals > 0)
    return hist.ravel()
