"""NK fitness landscape and knowledge-weighted (perceived) fitness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NK_STREAM = 2


@dataclass(frozen=True)
class NkLandscape:
    """Contribution tables ``W_j`` over ``(d_j, d_{j+1}, ..., d_{j+S})`` (cyclic neighbours).

    ``tables[j, code]`` where bit 0 of ``code`` is decision ``j`` and bit
    ``k + 1`` is its ``k``-th neighbour; a selected feature is bit 1.
    """

    neighbors: np.ndarray
    tables: np.ndarray

    @classmethod
    def generate(cls, dim: int, interactions: int, seed: int) -> "NkLandscape":
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        if not 0 <= interactions < dim:
            raise ValueError(f"interaction count S={interactions} must lie in 0..{dim - 1}")
        rng = np.random.default_rng([seed, NK_STREAM])
        j = np.arange(dim)[:, None]
        neighbors = (j + np.arange(1, interactions + 1)[None, :]) % dim
        tables = rng.random((dim, 2 ** (interactions + 1)))
        return cls(neighbors.astype(np.int64), tables)

    @property
    def dim(self) -> int:
        return self.tables.shape[0]

    @property
    def interactions(self) -> int:
        return self.neighbors.shape[1]

    def contributions(self, mask: np.ndarray) -> np.ndarray:
        """``W_j`` for every decision; ``mask`` may carry leading batch axes."""
        bits = np.asarray(mask, dtype=bool).astype(np.int64)
        if bits.shape[-1] != self.dim:
            raise ValueError(f"mask length {bits.shape[-1]} != landscape dimension {self.dim}")
        code = bits.copy()
        for k in range(self.interactions):
            code |= bits[..., self.neighbors[:, k]] << (k + 1)
        return self.tables[np.arange(self.dim), code]


def nk_fitness(mask: np.ndarray, landscape: NkLandscape) -> np.ndarray | float:
    """Mean contribution ``V(d) = (1/T) * sum_j W_j``."""
    w = landscape.contributions(mask)
    v = w.sum(axis=-1) / landscape.dim
    return float(v) if np.ndim(v) == 0 else v


def perceived_fitness(
    mask: np.ndarray, landscape: NkLandscape, knowledge: np.ndarray
) -> np.ndarray | float:
    """Knowledge-weighted mean of the contributions a member knows; 0 if it knows none."""
    w = landscape.contributions(mask)
    k = np.broadcast_to(np.asarray(knowledge, dtype=bool), w.shape)
    known = k.sum(axis=-1)
    total = np.where(k, w, 0.0).sum(axis=-1)
    v = np.where(known > 0, total / np.maximum(known, 1), 0.0)
    return float(v) if np.ndim(v) == 0 else v
