"""Nearest-centroid validation accuracy as a feature-subset fitness."""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError
from ..features.matrix import FeatureMatrix


class WrapperFitness:
    """Scores column masks by nearest-centroid accuracy on a validation set.

    Columns are standardized with training statistics. Columns that are
    constant on the training set carry no information and are dropped
    before any distance is computed.
    """

    def __init__(self, train: FeatureMatrix, val: FeatureMatrix):
        if train.n_features != val.n_features:
            raise DimensionError(
                f"train has {train.n_features} columns, validation has {val.n_features}"
            )
        if train.n_samples == 0 or val.n_samples == 0:
            raise ValueError("wrapper fitness needs non-empty train and validation sets")
        self.dim = train.n_features
        xt = train.values
        self.keep = np.ptp(xt, axis=0) > 0
        xt = xt[:, self.keep]
        mean = xt.mean(axis=0)
        std = xt.std(axis=0)
        xt = (xt - mean) / std
        self.classes = np.unique(train.row_labels)
        self.centroids = np.stack([xt[train.row_labels == c].mean(axis=0) for c in self.classes])
        self.centroid_sq = self.centroids**2
        self.xv = (val.values[:, self.keep] - mean) / std
        self.yv = val.row_labels

    def __call__(self, masks: np.ndarray) -> np.ndarray | float:
        """Accuracy for one mask (D,) or a batch (P, D)."""
        masks = np.asarray(masks, dtype=bool)
        single = masks.ndim == 1
        masks = np.atleast_2d(masks)
        if masks.shape[1] != self.dim:
            raise DimensionError(f"mask length {masks.shape[1]} != feature dimension {self.dim}")
        m = masks[:, self.keep].astype(np.float64)
        n_val, n_cls, n_masks = self.xv.shape[0], len(self.classes), m.shape[0]
        # ||x - mu||^2 restricted to the mask, minus the ||x||^2 term that is
        # identical across classes and cannot change the argmin
        weighted = (self.centroids[:, None, :] * m[None, :, :]).reshape(n_cls * n_masks, -1)
        cross = (self.xv @ weighted.T).reshape(n_val, n_cls, n_masks)
        dist = (self.centroid_sq @ m.T)[None, :, :] - 2.0 * cross
        pred = self.classes[np.argmin(dist, axis=1)]
        acc = (pred == self.yv[:, None]).mean(axis=0)
        acc[m.sum(axis=1) == 0] = 0.0
        return float(acc[0]) if single else acc


def wrapper_fitness(mask: np.ndarray, train: FeatureMatrix, val: FeatureMatrix) -> float:
    return WrapperFitness(train, val)(mask)
