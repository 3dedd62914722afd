"""Single-layer LSTM classifier trained with backpropagation through time (numpy)."""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np

from .errors import DimensionError, FormatError, TrainingDivergedError
from .features.matrix import FeatureMatrix

MODEL_MAGIC = b"LULCM1\0"

GATES = ("i", "f", "c", "o")
# fixed serialization order
PARAM_ORDER = (
    "W_ih", "W_ia", "W_fh", "W_fa", "W_ch", "W_ca", "W_oh", "W_oa",
    "b_i", "b_f", "b_c", "b_o",
    "W_y", "b_y",
)


def sigmoid(z: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    gradient_clip: float = 5.0
    optimizer: Literal["sgd_momentum", "adaptive_moment"] = "adaptive_moment"
    momentum: float = 0.9

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not self.gradient_clip > 0:
            raise ValueError("gradient_clip must be positive")
        if self.optimizer not in ("sgd_momentum", "adaptive_moment"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class LstmModel:
    input_dim: int
    hidden_dim: int
    timesteps: int
    n_classes: int
    params: dict[str, np.ndarray]
    # column standardization of the raw feature vector (length D)
    mean: np.ndarray = field(default_factory=lambda: np.zeros(0))
    std: np.ndarray = field(default_factory=lambda: np.ones(0))

    def __post_init__(self) -> None:
        shapes = param_shapes(self.input_dim, self.hidden_dim, self.n_classes)
        missing = set(shapes) - set(self.params)
        if missing:
            raise DimensionError(f"missing parameters: {sorted(missing)}")
        for name, shape in shapes.items():
            if self.params[name].shape != shape:
                raise DimensionError(f"{name} has shape {self.params[name].shape}, expected {shape}")

    @property
    def feature_dim(self) -> int:
        return len(self.mean)

    def copy(self) -> "LstmModel":
        return LstmModel(
            self.input_dim, self.hidden_dim, self.timesteps, self.n_classes,
            {k: v.copy() for k, v in self.params.items()}, self.mean.copy(), self.std.copy(),
        )


def param_shapes(f: int, h: int, c: int) -> dict[str, tuple[int, ...]]:
    shapes: dict[str, tuple[int, ...]] = {}
    for g in GATES:
        shapes[f"W_{g}h"] = (h, h)
        shapes[f"W_{g}a"] = (h, f)
        shapes[f"b_{g}"] = (h,)
    shapes["W_y"] = (c, h)
    shapes["b_y"] = (c,)
    return shapes


def init_model(input_dim: int, hidden_dim: int, timesteps: int, n_classes: int, seed: int = 0) -> LstmModel:
    """Uniform ``[-1/sqrt(H), 1/sqrt(H)]`` weights, forget-gate bias 1, zero head bias."""
    if min(input_dim, hidden_dim, timesteps, n_classes) < 1:
        raise ValueError("model dimensions must be >= 1")
    rng = np.random.default_rng([seed, 0])
    bound = 1.0 / math.sqrt(hidden_dim)
    params = {
        name: rng.uniform(-bound, bound, shape)
        for name, shape in param_shapes(input_dim, hidden_dim, n_classes).items()
    }
    params["b_f"] = np.ones(hidden_dim)
    params["b_y"] = np.zeros(n_classes)
    return LstmModel(input_dim, hidden_dim, timesteps, n_classes, params)


def reshape_sequence(row: np.ndarray, timesteps: int) -> np.ndarray:
    """Chunk a feature vector (or an (N, D) batch) into ``timesteps`` steps of ``ceil(D/T)`` features.

    The tail is zero-padded.
    """
    if timesteps < 1:
        raise ValueError("timesteps must be >= 1")
    row = np.asarray(row, dtype=np.float64)
    d = row.shape[-1]
    f = -(-d // timesteps)
    pad = f * timesteps - d
    if pad:
        row = np.concatenate([row, np.zeros(row.shape[:-1] + (pad,))], axis=-1)
    return row.reshape(row.shape[:-1] + (timesteps, f))


def lstm_cell(
    a: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray, model: LstmModel
) -> tuple[np.ndarray, np.ndarray]:
    """One step; inputs may carry a leading batch axis."""
    h, c, _ = _cell(a, h_prev, c_prev, model.params)
    return h, c


def _cell(a, h_prev, c_prev, p):
    a = np.asarray(a, dtype=np.float64)
    if a.shape[-1] != p["W_ia"].shape[1]:
        raise DimensionError(f"input has {a.shape[-1]} features, model expects {p['W_ia'].shape[1]}")
    if h_prev.shape[-1] != p["W_ih"].shape[0] or c_prev.shape != h_prev.shape:
        raise DimensionError("hidden/cell state shape does not match the model")
    i = sigmoid(h_prev @ p["W_ih"].T + a @ p["W_ia"].T + p["b_i"])
    f = sigmoid(h_prev @ p["W_fh"].T + a @ p["W_fa"].T + p["b_f"])
    g = np.tanh(h_prev @ p["W_ch"].T + a @ p["W_ca"].T + p["b_c"])
    o = sigmoid(h_prev @ p["W_oh"].T + a @ p["W_oa"].T + p["b_o"])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    return h, c, (a, h_prev, c_prev, i, f, g, o, tc)


def _unroll(seq: np.ndarray, p: dict[str, np.ndarray]):
    batch = seq.shape[0]
    hdim = p["W_ih"].shape[0]
    h = np.zeros((batch, hdim))
    c = np.zeros((batch, hdim))
    caches = []
    for t in range(seq.shape[1]):
        h, c, cache = _cell(seq[:, t, :], h, c, p)
        caches.append(cache)
    logits = h @ p["W_y"].T + p["b_y"]
    return h, logits, caches


def forward(seq: np.ndarray, model: LstmModel) -> tuple[np.ndarray, np.ndarray]:
    """``(h_N, logits)`` for a (T, F) sequence or a (B, T, F) batch; ``h_0 = c_0 = 0``."""
    seq = np.asarray(seq, dtype=np.float64)
    single = seq.ndim == 2
    h, logits, _ = _unroll(seq[None] if single else seq, model.params)
    return (h[0], logits[0]) if single else (h, logits)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def loss(logits: np.ndarray, label: int | np.ndarray) -> float:
    """Softmax cross-entropy; averaged over the batch for 2-D ``logits``."""
    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim == 1:
        return float(-log_softmax(logits)[int(label)])
    lab = np.asarray(label, dtype=np.int64)
    return float(-log_softmax(logits)[np.arange(len(lab)), lab].mean())


def loss_and_gradients(
    seq: np.ndarray, labels: np.ndarray, model: LstmModel
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean batch loss and its exact gradient for every parameter (BPTT)."""
    p = model.params
    seq = np.asarray(seq, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    batch = seq.shape[0]
    h_last, logits, caches = _unroll(seq, p)
    logp = log_softmax(logits)
    value = float(-logp[np.arange(batch), labels].mean())

    grads = {k: np.zeros_like(v) for k, v in p.items()}
    dlogits = np.exp(logp)
    dlogits[np.arange(batch), labels] -= 1.0
    dlogits /= batch
    grads["W_y"] = dlogits.T @ h_last
    grads["b_y"] = dlogits.sum(axis=0)
    dh = dlogits @ p["W_y"]
    dc = np.zeros_like(dh)
    for a, h_prev, c_prev, i, f, g, o, tc in reversed(caches):
        do = dh * tc
        dc = dc + dh * o * (1.0 - tc**2)
        dz = {
            "i": dc * g * i * (1.0 - i),
            "f": dc * c_prev * f * (1.0 - f),
            "c": dc * i * (1.0 - g**2),
            "o": do * o * (1.0 - o),
        }
        dh = np.zeros_like(dh)
        for gate, d in dz.items():
            grads[f"W_{gate}h"] += d.T @ h_prev
            grads[f"W_{gate}a"] += d.T @ a
            grads[f"b_{gate}"] += d.sum(axis=0)
            dh += d @ p[f"W_{gate}h"]
        dc = dc * f
    return value, grads


def backward(seq: np.ndarray, label: int, model: LstmModel) -> dict[str, np.ndarray]:
    """Gradients of the single-sample loss with respect to every parameter."""
    return loss_and_gradients(np.asarray(seq)[None], np.array([label]), model)[1]


def _standardize(values: np.ndarray, model: LstmModel) -> np.ndarray:
    if values.shape[1] != model.feature_dim:
        raise DimensionError(
            f"features have {values.shape[1]} columns, model expects {model.feature_dim}"
        )
    return (values - model.mean) / model.std


def _clip(grads: dict[str, np.ndarray], max_norm: float) -> None:
    norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale


def train(
    data: FeatureMatrix,
    cfg: TrainConfig = TrainConfig(),
    timesteps: int = 4,
    hidden_dim: int = 32,
    n_classes: int | None = None,
) -> tuple[LstmModel, list[float]]:
    """Fit a model on ``data``; returns the model and the mean training loss per epoch."""
    x = data.values
    y = data.row_labels
    n, d = x.shape
    if n == 0:
        raise ValueError("cannot train on an empty feature matrix")
    n_classes = n_classes or int(y.max()) + 1
    f = -(-d // timesteps)
    model = init_model(f, hidden_dim, timesteps, n_classes, cfg.seed)
    model.mean = x.mean(axis=0)
    std = x.std(axis=0)
    model.std = np.where(np.ptp(x, axis=0) > 0, std, 1.0)
    seqs = reshape_sequence(_standardize(x, model), timesteps)

    rng = np.random.default_rng([cfg.seed, 1])
    state = {k: (np.zeros_like(v), np.zeros_like(v)) for k, v in model.params.items()}
    step = 0
    history: list[float] = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            value, grads = loss_and_gradients(seqs[idx], y[idx], model)
            if not math.isfinite(value):
                raise TrainingDivergedError(
                    f"non-finite loss {value} at epoch {epoch}, batch starting {start}"
                )
            total += value * len(idx)
            _clip(grads, cfg.gradient_clip)
            step += 1
            for k, g in grads.items():
                m, v = state[k]
                if cfg.optimizer == "adaptive_moment":
                    m *= 0.9
                    m += 0.1 * g
                    v *= 0.999
                    v += 0.001 * g * g
                    m_hat = m / (1.0 - 0.9**step)
                    v_hat = v / (1.0 - 0.999**step)
                    model.params[k] -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + 1e-8)
                else:
                    m *= cfg.momentum
                    m -= cfg.learning_rate * g
                    model.params[k] += m
        history.append(total / n)
    return model, history


def predict_logits(model: LstmModel, data: FeatureMatrix | np.ndarray) -> np.ndarray:
    values = data.values if isinstance(data, FeatureMatrix) else np.atleast_2d(np.asarray(data, dtype=np.float64))
    seqs = reshape_sequence(_standardize(values, model), model.timesteps)
    if seqs.shape[-1] != model.input_dim:
        raise DimensionError(f"sequence width {seqs.shape[-1]} != model input_dim {model.input_dim}")
    return forward(seqs, model)[1]


def predict(model: LstmModel, data: FeatureMatrix | np.ndarray) -> np.ndarray:
    """Arg-max class per row; ties resolve to the lowest class index."""
    return np.argmax(predict_logits(model, data), axis=1)


# --- persistence -----------------------------------------------------------


def save_model(model: LstmModel, path: str | os.PathLike) -> None:
    """LULCM1: magic, u32 (F, H, T, C), float64 parameters in PARAM_ORDER, then mean and std."""
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<4I", model.input_dim, model.hidden_dim, model.timesteps, model.n_classes))
        for name in PARAM_ORDER:
            fh.write(np.ascontiguousarray(model.params[name], dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.mean, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.std, dtype="<f8").tobytes())


def load_model(path: str | os.PathLike) -> LstmModel:
    blob = Path(path).read_bytes()
    m = len(MODEL_MAGIC)
    if blob[:m] != MODEL_MAGIC:
        raise FormatError(f"{path}: magic mismatch, not an LULCM1 file")
    if len(blob) < m + 16:
        raise FormatError(f"{path}: truncated header")
    f, h, t, c = struct.unpack_from("<4I", blob, m)
    off = m + 16
    params = {}
    shapes = param_shapes(f, h, c)
    for name in PARAM_ORDER:
        shape = shapes[name]
        count = int(np.prod(shape))
        if off + 8 * count > len(blob):
            raise FormatError(f"{path}: truncated while reading {name}")
        params[name] = np.frombuffer(blob, dtype="<f8", count=count, offset=off).reshape(shape).astype(np.float64)
        off += 8 * count
    rest = len(blob) - off
    if rest % 16:
        raise FormatError(f"{path}: standardization block of {rest} bytes is not two float64 vectors")
    d = rest // 16
    mean = np.frombuffer(blob, dtype="<f8", count=d, offset=off).astype(np.float64)
    std = np.frombuffer(blob, dtype="<f8", count=d, offset=off + 8 * d).astype(np.float64)
    return LstmModel(f, h, t, c, params, mean, std)
