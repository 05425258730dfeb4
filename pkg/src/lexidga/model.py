"""Dense-128-ReLU + logistic classifier over frozen embeddings.

Trainable parameters are exactly one hidden layer and the output unit:
128*D + 128 + 128 + 1 weights for embedding dimension D.  Training is
plain Adam on (optionally class-weighted) binary cross-entropy with
early stopping on validation loss; the embedding provider is consulted
read-only and never updated.

Weights are float32 end to end so the on-disk format round-trips
bit-exactly; gradients and optimizer math run in float64.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelWeights",
    "TrainConfig",
    "TrainResult",
    "Gradients",
    "ModelError",
    "SingleClassData",
    "BadMagic",
    "TruncatedFile",
    "ShapeMismatch",
    "ChecksumMismatch",
    "init_weights",
    "forward",
    "forward_batch",
    "loss",
    "gradient",
    "class_weights",
    "embed_dataset",
    "train",
    "train_on_arrays",
    "save",
    "load",
]

MODEL_MAGIC = b"LDGAMDL1"
EPS = 1e-7  # probability clamp for cross-entropy


class ModelError(RuntimeError):
    pass


class SingleClassData(ModelError):
    pass


class BadMagic(ModelError):
    pass


class TruncatedFile(ModelError):
    pass


class ShapeMismatch(ModelError):
    pass


class ChecksumMismatch(ModelError):
    pass


@dataclass
class ModelWeights:
    """Hidden layer (w1, b1) and logistic output (w2, b2), all float32."""

    w1: np.ndarray  # (hidden, dim)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (hidden,)
    b2: float

    def __post_init__(self):
        self.w1 = np.ascontiguousarray(self.w1, dtype=np.float32)
        self.b1 = np.ascontiguousarray(self.b1, dtype=np.float32)
        self.w2 = np.ascontiguousarray(self.w2, dtype=np.float32)
        self.b2 = np.float32(self.b2)
        h, d = self.w1.shape
        if self.b1.shape != (h,) or self.w2.shape != (h,):
            raise ShapeMismatch("inconsistent hidden widths")
        if not all(np.isfinite(a).all() for a in (self.w1, self.b1, self.w2)):
            raise ValueError("non-finite weights")

    @property
    def dimension(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden(self) -> int:
        return self.w1.shape[0]

    @property
    def n_parameters(self) -> int:
        return self.w1.size + self.b1.size + self.w2.size + 1

    def copy(self) -> "ModelWeights":
        return ModelWeights(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2)


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 64
    max_epochs: int = 20
    patience: int = 3
    seed: int = 0
    hidden: int = 128
    positive_label: str = "dga"
    weight_classes: bool = True

    def __post_init__(self):
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if not 0 <= self.patience <= self.max_epochs:
            raise ValueError("patience must be in [0, max_epochs]")


@dataclass
class Gradients:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float


@dataclass
class TrainResult:
    weights: ModelWeights
    history: list[dict] = field(default_factory=list)
    best_epoch: int = 0


def init_weights(dim: int, hidden: int = 128, seed: int = 0) -> ModelWeights:
    """He-uniform hidden layer, Xavier-uniform output, zero biases."""
    rng = np.random.default_rng(seed)
    lim1 = np.sqrt(6.0 / dim)
    lim2 = np.sqrt(6.0 / (hidden + 1))
    return ModelWeights(
        w1=rng.uniform(-lim1, lim1, size=(hidden, dim)).astype(np.float32),
        b1=np.zeros(hidden, dtype=np.float32),
        w2=rng.uniform(-lim2, lim2, size=hidden).astype(np.float32),
        b2=0.0,
    )


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def forward_batch(x: np.ndarray, w: ModelWeights) -> np.ndarray:
    """Probabilities for a (n, dim) batch; computed in float64."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != w.dimension:
        raise ShapeMismatch(f"input dim {x.shape[1]} != model dim {w.dimension}")
    hidden = np.maximum(x @ w.w1.T.astype(np.float64) + w.b1.astype(np.float64), 0.0)
    return _sigmoid(hidden @ w.w2.astype(np.float64) + float(w.b2))


def forward(x: np.ndarray, w: ModelWeights) -> float:
    """sigmoid(w2 . relu(w1 x + b1) + b2) for a single embedding."""
    return float(forward_batch(x, w)[0])


def loss(
    x: np.ndarray,
    y: np.ndarray,
    w: ModelWeights,
    sample_weights: np.ndarray | None = None,
) -> float:
    """Mean binary cross-entropy with probabilities clamped to [EPS, 1-EPS]."""
    p = np.clip(forward_batch(x, w), EPS, 1.0 - EPS)
    y = np.asarray(y, dtype=np.float64)
    per = -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
    if sample_weights is not None:
        per = per * np.asarray(sample_weights, dtype=np.float64)
    return float(np.mean(per))


def gradient(
    x: np.ndarray,
    y: np.ndarray,
    w: ModelWeights,
    sample_weights: np.ndarray | None = None,
) -> Gradients:
    """Analytic gradients of `loss` for every parameter tensor."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    n = x.shape[0]
    w1 = w.w1.astype(np.float64)
    z1 = x @ w1.T + w.b1.astype(np.float64)
    a1 = np.maximum(z1, 0.0)
    p = _sigmoid(a1 @ w.w2.astype(np.float64) + float(w.b2))
    # inside the clamp d(loss)/dz2 = p - y; outside, the loss is flat in p
    active = (p > EPS) & (p < 1.0 - EPS)
    dz2 = np.where(active, p - y, 0.0) / n
    if sample_weights is not None:
        dz2 = dz2 * np.asarray(sample_weights, dtype=np.float64)
    gw2 = a1.T @ dz2
    gb2 = float(np.sum(dz2))
    dz1 = np.outer(dz2, w.w2.astype(np.float64)) * (z1 > 0.0)
    return Gradients(w1=dz1.T @ x, b1=dz1.sum(axis=0), w2=gw2, b2=gb2)


def class_weights(y: np.ndarray) -> np.ndarray:
    """Per-example weights inversely proportional to class frequency.

    Both classes contribute equal total weight, countering e.g. a
    14,000-benign / 24-positive training imbalance.
    """
    y = np.asarray(y)
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    n = n_pos + n_neg
    out = np.where(y == 1, n / (2.0 * n_pos), n / (2.0 * n_neg))
    return out.astype(np.float64)


def embed_dataset(examples, provider, tokenizer,
                  positive_label: str = "dga") -> tuple[np.ndarray, np.ndarray]:
    """Embed labeled examples into (X, y) arrays.

    ``examples`` are LabeledExample records; ``tokenizer`` maps a core
    string to its token sequence.  Cache misses propagate (training data
    must be fully pre-exported when using a cache provider).
    """
    xs = np.empty((len(examples), provider.dimension), dtype=np.float64)
    ys = np.empty(len(examples), dtype=np.int8)
    for i, ex in enumerate(examples):
        xs[i] = provider.embed_tokens(tokenizer(ex.domain.core))
        ys[i] = 1 if ex.label == positive_label else 0
    return xs, ys


def train_on_arrays(
    x_train: np.ndarray,
    y_train: np.ndarray,
    x_val: np.ndarray,
    y_val: np.ndarray,
    cfg: TrainConfig,
) -> TrainResult:
    """Adam + early stopping on pre-embedded data; fully deterministic."""
    if len(x_train) == 0 or len(x_val) == 0:
        raise ValueError("train and validation sets must be non-empty")
    classes = set(np.unique(y_train))
    if classes != {0, 1}:
        raise SingleClassData(f"training labels contain only {sorted(classes)}")

    sw_train = class_weights(y_train) if cfg.weight_classes else None
    sw_val = class_weights(y_val) if cfg.weight_classes and len(set(y_val)) == 2 else None

    w = init_weights(x_train.shape[1], hidden=cfg.hidden, seed=cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    adam_m = {k: 0.0 for k in ("w1", "b1", "w2", "b2")}
    adam_v = dict(adam_m)
    beta1, beta2, adam_eps = 0.9, 0.999, 1e-8
    step = 0

    best = w.copy()
    best_loss = np.inf
    best_epoch = 0
    history: list[dict] = []
    n = len(x_train)

    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(n)
        for lo in range(0, n, cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            g = gradient(
                x_train[idx],
                y_train[idx],
                w,
                None if sw_train is None else sw_train[idx],
            )
            step += 1
            for name in ("w1", "b1", "w2", "b2"):
                grad = getattr(g, name)
                adam_m[name] = beta1 * adam_m[name] + (1 - beta1) * np.asarray(grad)
                adam_v[name] = beta2 * adam_v[name] + (1 - beta2) * np.square(grad)
                m_hat = adam_m[name] / (1 - beta1**step)
                v_hat = adam_v[name] / (1 - beta2**step)
                update = cfg.learning_rate * m_hat / (np.sqrt(v_hat) + adam_eps)
                cur = getattr(w, name)
                if name == "b2":
                    w.b2 = np.float32(float(cur) - float(update))
                else:
                    setattr(w, name, (cur.astype(np.float64) - update).astype(np.float32))
        train_loss = loss(x_train, y_train, w, sw_train)
        val_loss = loss(x_val, y_val, w, sw_val)
        history.append({"epoch": epoch, "train_loss": train_loss, "val_loss": val_loss})
        if val_loss < best_loss:
            best_loss = val_loss
            best = w.copy()
            best_epoch = epoch
        if epoch - best_epoch >= cfg.patience:
            break
    return TrainResult(weights=best, history=history, best_epoch=best_epoch)


def train(train_examples, val_examples, provider, cfg: TrainConfig, tokenizer) -> TrainResult:
    """Embed both splits through the frozen provider, then fit."""
    x_train, y_train = embed_dataset(train_examples, provider, tokenizer,
                                     cfg.positive_label)
    x_val, y_val = embed_dataset(val_examples, provider, tokenizer,
                                 cfg.positive_label)
    return train_on_arrays(x_train, y_train, x_val, y_val, cfg)


def save(w: ModelWeights, path) -> None:
    """LDGAMDL1 format: magic, u32 dim, u32 hidden, f32 tensors, CRC32."""
    payload = bytearray()
    payload += MODEL_MAGIC
    payload += struct.pack("<II", w.dimension, w.hidden)
    payload += w.w1.tobytes()
    payload += w.b1.tobytes()
    payload += w.w2.tobytes()
    payload += struct.pack("<f", float(w.b2))
    payload += struct.pack("<I", zlib.crc32(bytes(payload)))
    with open(path, "wb") as fh:
        fh.write(bytes(payload))


def load(path, expect_dimension: int | None = None) -> ModelWeights:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 8 or data[:8] != MODEL_MAGIC:
        raise BadMagic(f"{path}: not a model file")
    if len(data) < 16 + 4:
        raise TruncatedFile(f"{path}: header cut short")
    dim, hidden = struct.unpack_from("<II", data, 8)
    body = 16 + 4 * (hidden * dim + hidden + hidden + 1)
    if len(data) < body + 4:
        raise TruncatedFile(f"{path}: expected {body + 4} bytes, found {len(data)}")
    if len(data) > body + 4:
        raise ShapeMismatch(f"{path}: trailing bytes after checksum")
    (crc,) = struct.unpack_from("<I", data, body)
    if zlib.crc32(data[:body]) != crc:
        raise ChecksumMismatch(f"{path}: checksum mismatch")
    if expect_dimension is not None and dim != expect_dimension:
        raise ShapeMismatch(f"{path}: model dim {dim}, expected {expect_dimension}")
    offset = 16
    w1 = np.frombuffer(data, dtype="<f4", count=hidden * dim, offset=offset).reshape(hidden, dim)
    offset += 4 * hidden * dim
    b1 = np.frombuffer(data, dtype="<f4", count=hidden, offset=offset)
    offset += 4 * hidden
    w2 = np.frombuffer(data, dtype="<f4", count=hidden, offset=offset)
    offset += 4 * hidden
    (b2,) = struct.unpack_from("<f", data, offset)
    return ModelWeights(w1=w1.copy(), b1=b1.copy(), w2=w2.copy(), b2=b2)
