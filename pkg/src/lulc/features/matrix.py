"""FeatureMatrix container, dataset-level extraction and its on-disk formats."""

from __future__ import annotations

import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import DimensionError, FormatError
from ..ingest import Image, LabeledDataset, worker_count
from .haralick import HARALICK_NAMES, GlcmSpec, haralick_per_channel
from .hog import HogSpec, hog_descriptor
from .lgbphs import GaborBankSpec, LgbphsSpec, lgbphs_descriptor, lgbphs_length

FEATURE_MAGIC = b"LULCF1\0"
_U32 = struct.Struct("<I")


@dataclass
class FeatureMatrix:
    values: np.ndarray
    column_tags: list[str]
    row_labels: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        self.row_labels = np.asarray(self.row_labels, dtype=np.int64)
        if self.values.ndim != 2:
            raise DimensionError(f"feature values must be 2-D, got shape {self.values.shape}")
        n, d = self.values.shape
        if len(self.column_tags) != d:
            raise DimensionError(f"{len(self.column_tags)} column tags for {d} columns")
        if self.row_labels.shape != (n,):
            raise DimensionError(f"{self.row_labels.shape[0]} labels for {n} rows")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature matrix contains NaN or Inf")
        self.column_tags = list(self.column_tags)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def rows(self, indices: Sequence[int] | np.ndarray) -> "FeatureMatrix":
        idx = np.asarray(indices, dtype=np.int64)
        return FeatureMatrix(self.values[idx], self.column_tags, self.row_labels[idx])

    def columns(self, mask: np.ndarray) -> "FeatureMatrix":
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (self.n_features,):
            raise DimensionError(f"mask of length {mask.size} for {self.n_features} columns")
        cols = np.flatnonzero(mask)
        return FeatureMatrix(
            self.values[:, cols], [self.column_tags[i] for i in cols], self.row_labels
        )


@dataclass(frozen=True)
class FeatureSpecs:
    hog: HogSpec = field(default_factory=HogSpec)
    gabor: GaborBankSpec = field(default_factory=GaborBankSpec)
    lgbphs: LgbphsSpec = field(default_factory=LgbphsSpec)
    glcm: GlcmSpec = field(default_factory=GlcmSpec)

    def dimensions(self, height: int, width: int, channels: int) -> dict[str, int]:
        return {
            "hog": self.hog.length(height, width),
            "lgbphs": lgbphs_length(self.gabor, self.lgbphs),
            "haralick": len(HARALICK_NAMES) * channels,
        }

    def column_tags(self, height: int, width: int, channels: int) -> list[str]:
        dims = self.dimensions(height, width, channels)
        tags = [f"hog_{i}" for i in range(dims["hog"])]
        tags += [f"lgbphs_{i}" for i in range(dims["lgbphs"])]
        tags += [f"haralick_c{k}_{name}" for k in range(channels) for name in HARALICK_NAMES]
        return tags


def image_features(img: Image, specs: FeatureSpecs) -> np.ndarray:
    """One row: ``[HOG | LGBPHS | Haralick per channel]``."""
    return np.concatenate(
        [
            hog_descriptor(img, specs.hog),
            lgbphs_descriptor(img, specs.gabor, specs.lgbphs),
            haralick_per_channel(img, specs.glcm),
        ]
    )


def extract_all(
    ds: LabeledDataset, specs: FeatureSpecs = FeatureSpecs(), workers: int | None = None
) -> FeatureMatrix:
    if not ds.images:
        raise ValueError("cannot extract features from an empty dataset")
    first = ds.images[0]
    if any(im.data.shape != first.data.shape for im in ds.images):
        raise DimensionError("all images must share one shape for a fixed-width feature matrix")
    tags = specs.column_tags(first.height, first.width, first.channels)
    values = np.empty((len(ds.images), len(tags)), dtype=np.float64)

    def fill(i: int) -> None:
        values[i] = image_features(ds.images[i], specs)

    workers = workers or worker_count()
    if workers == 1:
        for i in range(len(ds.images)):
            fill(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, range(len(ds.images))))
    return FeatureMatrix(values, tags, np.asarray(ds.labels, dtype=np.int64))


# --- persistence -----------------------------------------------------------


def save_features(fm: FeatureMatrix, path: str | os.PathLike) -> None:
    """Write the LULCF1 binary layout."""
    n, d = fm.values.shape
    with open(path, "wb") as fh:
        fh.write(FEATURE_MAGIC)
        fh.write(struct.pack("<II", n, d))
        fh.write(np.ascontiguousarray(fm.values, dtype="<f8").tobytes())
        for tag in fm.column_tags:
            raw = tag.encode("utf-8")
            fh.write(_U32.pack(len(raw)))
            fh.write(raw)
        fh.write(np.ascontiguousarray(fm.row_labels, dtype="<u4").tobytes())


def load_features(path: str | os.PathLike) -> FeatureMatrix:
    blob = Path(path).read_bytes()
    m = len(FEATURE_MAGIC)
    if blob[:m] != FEATURE_MAGIC:
        raise FormatError(f"{path}: magic mismatch, not an LULCF1 file")
    try:
        n, d = struct.unpack_from("<II", blob, m)
        off = m + 8
        values = np.frombuffer(blob, dtype="<f8", count=n * d, offset=off).reshape(n, d)
        off += 8 * n * d
        tags = []
        for _ in range(d):
            (length,) = _U32.unpack_from(blob, off)
            off += 4
            if off + length > len(blob):
                raise FormatError(f"{path}: truncated tag table")
            tags.append(blob[off : off + length].decode("utf-8"))
            off += length
        labels = np.frombuffer(blob, dtype="<u4", count=n, offset=off)
        off += 4 * n
    except (struct.error, ValueError) as exc:
        raise FormatError(f"{path}: truncated or corrupt LULCF1 file ({exc})") from exc
    if off != len(blob):
        raise FormatError(f"{path}: {len(blob) - off} trailing bytes")
    return FeatureMatrix(values.astype(np.float64), tags, labels.astype(np.int64))


def save_features_csv(fm: FeatureMatrix, path: str | os.PathLike) -> None:
    """CSV with header ``label,<tags...>``; floats use round-trip ``repr``."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(["label", *fm.column_tags]) + "\n")
        for lab, row in zip(fm.row_labels.tolist(), fm.values.tolist()):
            fh.write(f"{lab}," + ",".join(map(repr, row)) + "\n")


def load_features_csv(path: str | os.PathLike) -> FeatureMatrix:
    with open(path, newline="") as fh:
        header = fh.readline().rstrip("\n").split(",")
        if not header or header[0] != "label":
            raise FormatError(f"{path}: header must start with 'label'")
        labels, rows = [], []
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise FormatError(f"{path}:{lineno}: {len(parts)} fields, expected {len(header)}")
            labels.append(int(parts[0]))
            rows.append([float(x) for x in parts[1:]])
    values = np.array(rows, dtype=np.float64).reshape(len(rows), len(header) - 1)
    return FeatureMatrix(values, header[1:], np.array(labels, dtype=np.int64))
