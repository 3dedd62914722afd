"""Pipeline stages: extract -> select -> train -> eval, with artifact persistence."""

from __future__ import annotations

import contextlib
import hashlib
import logging
import time
from pathlib import Path
from typing import Iterator

import numpy as np

from . import hgpso, lstm, metrics
from .config import PipelineConfig
from .errors import DimensionError, LulcError
from .features import FeatureMatrix, extract_all, load_features, save_features, save_features_csv
from .ingest import LabeledDataset, load_directory, load_raw_tensor, split_indices
from .preprocess import preprocess

log = logging.getLogger("lulc")

FEATURES = "features.lulcf"
FEATURES_CSV = "features.csv"
CLASSES = "classes.txt"
EXTRACT_LOG = "extract.log"
MASK = "mask.txt"
TRACE = "trace.csv"
SELECTED = "selected.lulcf"
MODEL = "model.lulcm"
LOSS_TRACE = "loss_trace.csv"
REPORT = "report.csv"
CONFUSION = "confusion.csv"
EFFECTIVE_CONFIG = "config.effective.txt"
MANIFEST = "manifest.txt"


class StageError(LulcError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@contextlib.contextmanager
def stage(name: str) -> Iterator[None]:
    try:
        yield
    except StageError:
        raise
    except (LulcError, ValueError, OSError) as exc:
        raise StageError(name, str(exc)) from exc


def _out(cfg: PipelineConfig) -> Path:
    out = Path(cfg.values["run.out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def load_dataset(cfg: PipelineConfig) -> LabeledDataset:
    v = cfg.values
    if not v["dataset.path"]:
        raise LulcError("dataset.path is not set")
    if v["dataset.source"] == "raw":
        return load_raw_tensor(v["dataset.path"], v["dataset.manifest"])
    return load_directory(v["dataset.path"])


def read_class_names(features_path: Path, fm: FeatureMatrix) -> list[str]:
    sidecar = features_path.parent / CLASSES
    if sidecar.exists():
        return sidecar.read_text().splitlines()
    return [f"class_{c}" for c in range(int(fm.row_labels.max()) + 1)]


def cmd_extract(cfg: PipelineConfig) -> Path:
    with stage("extract"):
        out = _out(cfg)
        t0 = time.perf_counter()
        ds = load_dataset(cfg)
        t1 = time.perf_counter()
        images = [preprocess(im, cfg.normalization, cfg.equalize) for im in ds.images]
        ds = LabeledDataset(images, ds.labels, ds.class_names)
        t2 = time.perf_counter()
        specs = cfg.features
        fm = extract_all(ds, specs)
        t3 = time.perf_counter()
        save_features(fm, out / FEATURES)
        save_features_csv(fm, out / FEATURES_CSV)
        (out / CLASSES).write_text("\n".join(ds.class_names) + "\n")
        first = ds.images[0]
        dims = specs.dimensions(first.height, first.width, first.channels)
        lines = [f"images {len(ds)}", f"classes {len(ds.class_names)}"]
        lines += [f"dim.{k} {v}" for k, v in dims.items()] + [f"dim.total {fm.n_features}"]
        lines += [f"time.load {t1 - t0:.3f}s", f"time.preprocess {t2 - t1:.3f}s", f"time.features {t3 - t2:.3f}s"]
        (out / EXTRACT_LOG).write_text("\n".join(lines) + "\n")
        log.info("extract: %d images -> %d features (%s)", len(ds), fm.n_features, dims)
        return out / FEATURES


def cmd_select(cfg: PipelineConfig, features_path: Path | None = None) -> Path:
    with stage("select"):
        out = _out(cfg)
        features_path = Path(features_path or out / FEATURES)
        fm = load_features(features_path)
        train_idx, _ = split_indices(fm.row_labels, cfg.split)
        result = hgpso.run(fm.rows(train_idx), cfg.swarm)
        hgpso.save_mask(result.mask, fm.column_tags, out / MASK)
        hgpso.save_trace(result.trace, out / TRACE)
        save_features(fm.columns(result.mask), out / SELECTED)
        if features_path.parent.resolve() != out.resolve() and (features_path.parent / CLASSES).exists():
            (out / CLASSES).write_text((features_path.parent / CLASSES).read_text())
        log.info("select: kept %d of %d columns (ratio %.3f, fitness %.4f)",
                 int(result.mask.sum()), fm.n_features, result.ratio, result.fitness)
        return out / SELECTED


def cmd_train(cfg: PipelineConfig, features_path: Path | None = None) -> Path:
    with stage("train"):
        out = _out(cfg)
        features_path = Path(features_path or out / SELECTED)
        fm = load_features(features_path)
        n_classes = len(read_class_names(features_path, fm))
        train_idx, _ = split_indices(fm.row_labels, cfg.split)
        model, history = lstm.train(
            fm.rows(train_idx), cfg.train, cfg.timesteps, cfg.hidden_dim, n_classes
        )
        lstm.save_model(model, out / MODEL)
        with open(out / LOSS_TRACE, "w") as fh:
            fh.write("epoch,loss\n")
            for e, value in enumerate(history):
                fh.write(f"{e},{value!r}\n")
        log.info("train: %d epochs, final loss %s", len(history), history[-1] if history else "n/a")
        return out / MODEL


def evaluate(model: lstm.LstmModel, fm: FeatureMatrix, class_names: list[str]) -> metrics.EvalReport:
    if fm.n_features != model.feature_dim:
        raise DimensionError(
            f"model expects {model.feature_dim} features, matrix has {fm.n_features}"
        )
    pred = lstm.predict(model, fm)
    return metrics.report(fm.row_labels, pred, model.n_classes, class_names)


def cmd_eval(
    cfg: PipelineConfig,
    features_path: Path | None = None,
    model_path: Path | None = None,
    subset: str = "test",
) -> metrics.EvalReport:
    with stage("eval"):
        out = _out(cfg)
        features_path = Path(features_path or out / SELECTED)
        model = lstm.load_model(model_path or out / MODEL)
        fm = load_features(features_path)
        names = read_class_names(features_path, fm)
        if len(names) != model.n_classes:
            names = [f"class_{c}" for c in range(model.n_classes)]
        train_idx, test_idx = split_indices(fm.row_labels, cfg.split)
        rows = {"test": test_idx, "train": train_idx, "all": np.arange(fm.n_samples)}
        if subset not in rows:
            raise ValueError(f"subset must be one of {sorted(rows)}")
        rep = evaluate(model, fm.rows(rows[subset]), names)
        metrics.save_report_csv(rep, out / REPORT)
        metrics.save_confusion_csv(rep, out / CONFUSION)
        log.info("eval (%s): overall accuracy %.3f%%", subset, rep.overall.accuracy)
        return rep


def sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out: Path) -> Path:
    """``<sha256>  <name>`` for every artifact; logs and the manifest itself are excluded."""
    files = sorted(p for p in out.iterdir() if p.is_file() and p.name != MANIFEST and p.suffix != ".log")
    (out / MANIFEST).write_text("".join(f"{sha256(p)}  {p.name}\n" for p in files))
    return out / MANIFEST


def cmd_pipeline(cfg: PipelineConfig) -> metrics.EvalReport:
    out = _out(cfg)
    (out / EFFECTIVE_CONFIG).write_text(cfg.to_text())
    features = cmd_extract(cfg)
    if cfg.values["run.skip_select"]:
        train_on = features
    else:
        train_on = cmd_select(cfg, features)
    model = cmd_train(cfg, train_on)
    rep = cmd_eval(cfg, train_on, model)
    with stage("pipeline"):
        write_manifest(out)
    return rep
