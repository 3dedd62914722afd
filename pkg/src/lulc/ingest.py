"""Dataset loading (PNG class directories, LULCT1 raw tensors) and train/test splits."""

from __future__ import annotations

import csv
import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image as PILImage

from .errors import FormatError, IngestError

RAW_MAGIC = b"LULCT1\0\0"
_RAW_HEADER = struct.Struct("<4I")
MAX_CHANNELS = 16

# PIL mode -> (channels, value_range)
_PNG_MODES = {
    "1": (1, (0.0, 255.0)),
    "L": (1, (0.0, 255.0)),
    "LA": (2, (0.0, 255.0)),
    "RGB": (3, (0.0, 255.0)),
    "RGBA": (4, (0.0, 255.0)),
    "I;16": (1, (0.0, 65535.0)),
}


def worker_count() -> int:
    """Worker cap from ``LULC_THREADS`` (defaults to the CPU count)."""
    raw = os.environ.get("LULC_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Image:
    """An H x W x C raster with a declared intensity range.

    ``data`` is stored as a float64 array of shape (height, width, channels);
    flattening it in C order gives the row-major, channel-fastest layout.
    """

    data: np.ndarray
    value_range: tuple[float, float] = (0.0, 255.0)

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise ValueError(f"image data must be 2-D or 3-D, got shape {arr.shape}")
        h, w, c = arr.shape
        if h < 1 or w < 1:
            raise ValueError("image must be at least 1x1")
        if not 1 <= c <= MAX_CHANNELS:
            raise ValueError(f"channel count {c} outside 1..{MAX_CHANNELS}")
        lo, hi = float(self.value_range[0]), float(self.value_range[1])
        if not lo <= hi:
            raise ValueError(f"bad value_range {self.value_range}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image contains non-finite values")
        if arr.min() < lo or arr.max() > hi:
            raise ValueError(
                f"values [{arr.min()}, {arr.max()}] fall outside value_range ({lo}, {hi})"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "value_range", (lo, hi))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def channel(self, k: int) -> np.ndarray:
        return self.data[:, :, k]


@dataclass
class LabeledDataset:
    images: list[Image]
    labels: list[int]
    class_names: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if len(self.images) != len(self.labels):
            raise ValueError(
                f"{len(self.images)} images but {len(self.labels)} labels"
            )
        n_classes = len(self.class_names)
        for lab in self.labels:
            if not 0 <= lab < n_classes:
                raise ValueError(f"label {lab} outside 0..{n_classes - 1}")
        if self.images:
            c0 = self.images[0].channels
            if any(im.channels != c0 for im in self.images):
                raise ValueError("images do not share a channel count")

    def __len__(self) -> int:
        return len(self.images)

    def subset(self, indices: Sequence[int]) -> "LabeledDataset":
        return LabeledDataset(
            images=[self.images[i] for i in indices],
            labels=[self.labels[i] for i in indices],
            class_names=list(self.class_names),
        )


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    seed: int = 0
    stratified: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


def _decode_png(path: Path) -> Image:
    try:
        with PILImage.open(path) as im:
            im.load()
            if im.mode == "P":
                im = im.convert("RGBA" if "transparency" in im.info else "RGB")
            elif im.mode not in _PNG_MODES:
                raise IngestError(f"{path}: unsupported PNG mode {im.mode!r}")
            channels, vrange = _PNG_MODES[im.mode]
            arr = np.array(im)
    except IngestError:
        raise
    except Exception as exc:  # PIL raises a zoo of exception types
        raise IngestError(f"{path}: cannot decode image ({exc})") from exc
    if im.mode == "1":
        arr = arr.astype(np.uint8) * 255
    arr = arr.reshape(arr.shape[0], arr.shape[1], channels)
    return Image(arr, vrange)


def load_directory(root: str | os.PathLike) -> LabeledDataset:
    """Load ``root/<class_name>/*.png`` into a dataset.

    Classes are ordered by directory name and files by filename, so reloading
    the same tree always gives the same dataset.
    """
    root = Path(root)
    if not root.is_dir():
        raise IngestError(f"{root}: dataset root does not exist or is not a directory")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise IngestError(f"{root}: no class subdirectories found")

    jobs: list[tuple[Path, int]] = []
    for label, cdir in enumerate(class_dirs):
        files = sorted(p for p in cdir.iterdir() if p.is_file() and p.suffix.lower() == ".png")
        if not files:
            raise IngestError(f"{cdir}: class directory contains no PNG images")
        jobs.extend((f, label) for f in files)

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        images = list(pool.map(_decode_png, [p for p, _ in jobs]))

    first_channels = images[0].channels
    for (path, _), im in zip(jobs, images):
        if im.channels != first_channels:
            raise IngestError(
                f"{path}: mixed channel counts ({im.channels} vs {first_channels} in {jobs[0][0]})"
            )
    return LabeledDataset(
        images=images,
        labels=[lab for _, lab in jobs],
        class_names=[p.name for p in class_dirs],
    )


def _read_manifest(manifest: Path) -> list[str]:
    try:
        with open(manifest, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["index", "label"]:
                raise FormatError(f"{manifest}: expected header 'index,label', got {header}")
            rows = [r for r in reader if r]
    except OSError as exc:
        raise IngestError(f"{manifest}: cannot read manifest ({exc})") from exc
    labels: list[str | None] = [None] * len(rows)
    for r in rows:
        if len(r) != 2:
            raise FormatError(f"{manifest}: malformed row {r}")
        try:
            idx = int(r[0])
        except ValueError as exc:
            raise FormatError(f"{manifest}: bad index {r[0]!r}") from exc
        if not 0 <= idx < len(rows) or labels[idx] is not None:
            raise FormatError(f"{manifest}: index {idx} out of range or duplicated")
        labels[idx] = r[1].strip()
    return labels  # type: ignore[return-value]


def load_raw_tensor(path: str | os.PathLike, manifest: str | os.PathLike) -> LabeledDataset:
    """Load an LULCT1 tensor file plus its ``index,label`` manifest CSV."""
    path, manifest = Path(path), Path(manifest)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise IngestError(f"{path}: cannot read tensor file ({exc})") from exc
    head = len(RAW_MAGIC) + _RAW_HEADER.size
    if len(blob) < head or blob[: len(RAW_MAGIC)] != RAW_MAGIC:
        raise FormatError(f"{path}: magic mismatch, not an LULCT1 file")
    n, h, w, c = _RAW_HEADER.unpack_from(blob, len(RAW_MAGIC))
    expected = n * h * w * c
    payload = len(blob) - head
    if payload < expected:
        raise FormatError(f"{path}: truncated payload ({payload} of {expected} bytes)")
    if payload > expected:
        raise FormatError(f"{path}: {payload - expected} trailing bytes after payload")
    if h < 1 or w < 1 or not 1 <= c <= MAX_CHANNELS:
        raise FormatError(f"{path}: invalid dimensions H={h} W={w} C={c}")

    names = _read_manifest(manifest)
    if len(names) != n:
        raise FormatError(f"{manifest}: {len(names)} labels for {n} records in {path}")

    arr = np.frombuffer(blob, dtype=np.uint8, count=expected, offset=head).reshape(n, h, w, c)
    class_names = sorted(set(names))
    index = {name: i for i, name in enumerate(class_names)}
    return LabeledDataset(
        images=[Image(arr[i], (0.0, 255.0)) for i in range(n)],
        labels=[index[name] for name in names],
        class_names=class_names,
    )


def write_raw_tensor(ds: LabeledDataset, path: str | os.PathLike, manifest: str | os.PathLike) -> None:
    """Write an 8-bit dataset as LULCT1 + manifest (inverse of :func:`load_raw_tensor`)."""
    if not ds.images:
        raise ValueError("cannot write an empty dataset")
    h, w, c = ds.images[0].data.shape
    if any(im.data.shape != (h, w, c) for im in ds.images):
        raise ValueError("LULCT1 requires images of identical shape")
    stack = np.stack([im.data for im in ds.images])
    if stack.min() < 0 or stack.max() > 255 or np.any(stack != np.round(stack)):
        raise ValueError("LULCT1 stores unsigned bytes; data must be integers in 0..255")
    with open(path, "wb") as fh:
        fh.write(RAW_MAGIC)
        fh.write(_RAW_HEADER.pack(len(ds.images), h, w, c))
        fh.write(stack.astype(np.uint8).tobytes(order="C"))
    with open(manifest, "w", newline="") as fh:
        fh.write("index,label\n")
        for i, lab in enumerate(ds.labels):
            fh.write(f"{i},{ds.class_names[lab]}\n")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split_indices(labels: Sequence[int], spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Return sorted (train, test) index arrays for ``labels`` under ``spec``."""
    labels = np.asarray(labels, dtype=np.int64)
    n = len(labels)
    if n == 0:
        raise ValueError("cannot split an empty dataset")
    rng = np.random.default_rng(spec.seed)
    if spec.stratified:
        train_parts = []
        for cls in np.unique(labels):
            members = np.flatnonzero(labels == cls)
            if len(members) < 2:
                raise ValueError(f"stratified split needs >= 2 samples per class; class {cls} has {len(members)}")
            k = _round_half_up(spec.train_fraction * len(members))
            train_parts.append(members[rng.permutation(len(members))[:k]])
        train = np.sort(np.concatenate(train_parts))
    else:
        k = _round_half_up(spec.train_fraction * n)
        train = np.sort(rng.permutation(n)[:k])
    in_train = np.zeros(n, dtype=bool)
    in_train[train] = True
    return train, np.flatnonzero(~in_train)


def split(ds: LabeledDataset, spec: SplitSpec) -> tuple[LabeledDataset, LabeledDataset]:
    train, test = split_indices(ds.labels, spec)
    return ds.subset(train.tolist()), ds.subset(test.tolist())
