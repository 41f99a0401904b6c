"""Small from-scratch detector trained with single- or dual-criteria loss.

Architecture: a fixed, non-learned preprocessing stage (luma, minus its
own 3x3 box blur, bilinearly downsampled to a 32x32 grid) feeding a
1024 -> 32 tanh hidden layer and a linear logit head. The high-pass
residual front end mimics the frequency sensitivity that makes
fingerprint detectors work; the 32-unit hidden layer is the feature
vector compared by the feature-similarity loss.

Everything here is float64 and fully deterministic given the config
seeds. Analytic gradients are validated against central finite
differences in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
import json
import struct

import numpy as np

from . import augment, kernels, scenarios
from .errors import MalformedImageError, MissingFileError, ParameterError
from .image import Image
from .rng import Rng

INPUT_GRID = 32
N_INPUT = INPUT_GRID * INPUT_GRID
N_HIDDEN = 32

FT_NONE = "none"
FT_MSE = "mse"
FT_COSINE = "cosine"
_FT_KINDS = (FT_NONE, FT_MSE, FT_COSINE)
_COSINE_NORM_FLOOR = 1e-12

_CHECKPOINT_MAGIC = b"SIDAUGC1"
_CHECKPOINT_VERSION = 1

_W1_INIT_STD = 2.0
_B1_INIT = 0.5
_W2_INIT = -0.04
# Centers the initial logit: E[tanh(b + u)] is ~0.31 for the input
# scales the corpus produces, so the head's negative sum starts near
# -0.40 and the bias cancels it. Keeps decision accuracy tracking
# ranking quality from the first epoch instead of waiting on Adam to
# walk the bias over.
_B2_INIT = float(N_HIDDEN) * (-_W2_INIT) * 0.31


@dataclass(frozen=True)
class LossConfig:
    """Weights and flavor of the combined training objective."""

    lambda1: float = 1.0
    lambda2: float = 0.0
    ft_kind: str = FT_NONE

    def __post_init__(self):
        if self.ft_kind not in _FT_KINDS:
            raise ParameterError(f"ft_kind must be one of {_FT_KINDS}, got {self.ft_kind!r}")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ParameterError("loss weights must be >= 0")
        if (self.ft_kind == FT_NONE) != (self.lambda2 == 0.0):
            raise ParameterError("ft_kind='none' requires lambda2=0 and vice versa")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 25
    batch_size: int = 64
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    lr0: float = 0.001
    lr_decay_factor: float = 0.1
    lr_decay_every: int = 10
    early_stop_patience: int = 7
    lr_floor: float = 1e-6
    train_augmentations: augment.AugmentationSet = field(default_factory=augment.AugmentationSet)
    perturbation_for_ft: scenarios.Scenario | None = None
    seed: int = 0

    def __post_init__(self):
        for name in ("epochs", "batch_size", "lr_decay_every"):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be >= 1")
        if self.early_stop_patience < 1:
            raise ParameterError("early_stop_patience must be >= 1")
        for name in ("lr0", "lr_decay_factor", "lr_floor", "adam_eps"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be > 0")

    def ft_scenario(self) -> scenarios.Scenario:
        return self.perturbation_for_ft or scenarios.builtin_scenario("combined")


@dataclass
class EpochStats:
    epoch: int
    mean_total_loss: float
    mean_cls_loss: float
    mean_ft_loss: float
    val_accuracy: float
    lr: float


@dataclass
class TrainHistory:
    epochs: list[EpochStats] = field(default_factory=list)
    stop_reason: str = "epochs_exhausted"
    best_epoch: int = -1


@dataclass
class Model:
    """Weights of the two trainable layers."""

    w1: np.ndarray  # (32, 1024)
    b1: np.ndarray  # (32,)
    w2: np.ndarray  # (32,)
    b2: float

    @classmethod
    def init(cls, rng: Rng) -> "Model":
        # Antithetic init: hidden rows come in (w, -w) pairs with a
        # positive bias, so each pair's summed response is an even
        # function of the projection w.x. The planted fingerprint has
        # random phase, which makes the sign of any projection
        # uninformative; starting in this even-function basin lets the
        # head read input energy immediately instead of spending most
        # of the epoch budget cancelling odd components. The head
        # starts small and uniform; training calibrates it.
        half = rng.normal_array(N_HIDDEN // 2 * N_INPUT).reshape(N_HIDDEN // 2, N_INPUT)
        w1 = np.empty((N_HIDDEN, N_INPUT))
        w1[0::2] = half * _W1_INIT_STD
        w1[1::2] = -half * _W1_INIT_STD
        b1 = np.full(N_HIDDEN, _B1_INIT)
        w2 = np.full(N_HIDDEN, _W2_INIT)
        return cls(w1=w1, b1=b1, w2=w2, b2=_B2_INIT)

    @classmethod
    def zeros(cls) -> "Model":
        return cls(np.zeros((N_HIDDEN, N_INPUT)), np.zeros(N_HIDDEN), np.zeros(N_HIDDEN), 0.0)

    def copy(self) -> "Model":
        return Model(self.w1.copy(), self.b1.copy(), self.w2.copy(), float(self.b2))

    def preprocess(self, image: Image) -> np.ndarray:
        """High-pass residual of the luma plane, resampled to the input grid."""
        if min(image.height, image.width) < INPUT_GRID:
            raise ParameterError(
                f"model input must be at least {INPUT_GRID}x{INPUT_GRID}, "
                f"got {image.height}x{image.width}"
            )
        luma = image.luma()
        residual = luma - kernels.sep_conv(luma, kernels.BOX3)
        return kernels.resize_bilinear(residual, INPUT_GRID, INPUT_GRID).reshape(-1)

    def forward(self, image: Image) -> tuple[np.ndarray, float]:
        """Return (feature vector, logit); probability is sigmoid(logit)."""
        x = self.preprocess(image)
        features = np.tanh(self.w1 @ x + self.b1)
        return features, float(self.w2 @ features + self.b2)

    def _forward_batch(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        hidden = np.tanh(x @ self.w1.T + self.b1)
        return hidden, hidden @ self.w2 + self.b2


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def bce_loss(logit: float, label: int) -> float:
    """Numerically stable binary cross entropy on a raw logit."""
    z = float(logit)
    if not np.isfinite(z):
        raise ParameterError(f"bce_loss needs a finite logit, got {z}")
    return max(z, 0.0) - z * label + np.log1p(np.exp(-abs(z)))


def feature_loss(f_orig: np.ndarray, f_pert: np.ndarray, kind: str) -> float:
    """Distance between original and perturbed feature vectors."""
    f_orig = np.asarray(f_orig, dtype=np.float64)
    f_pert = np.asarray(f_pert, dtype=np.float64)
    if f_orig.shape != f_pert.shape:
        raise ParameterError(f"feature dim mismatch: {f_orig.shape} vs {f_pert.shape}")
    if kind == FT_MSE:
        diff = f_orig - f_pert
        return float(np.mean(diff * diff))
    if kind == FT_COSINE:
        n1 = float(np.linalg.norm(f_orig))
        n2 = float(np.linalg.norm(f_pert))
        if n1 <= _COSINE_NORM_FLOOR or n2 <= _COSINE_NORM_FLOOR:
            return 0.0
        return 1.0 - float(f_orig @ f_pert) / (n1 * n2)
    raise ParameterError(f"feature loss kind must be mse or cosine, got {kind!r}")


def total_loss(l_cls: float, l_ft: float, cfg: LossConfig) -> float:
    return cfg.lambda1 * l_cls + cfg.lambda2 * l_ft


def _ft_terms(hidden, hidden_pert, kind):
    """Per-row feature losses and their gradients wrt both feature banks."""
    if kind == FT_MSE:
        diff = hidden - hidden_pert
        losses = np.mean(diff * diff, axis=1)
        d_h = (2.0 / hidden.shape[1]) * diff
        return losses, d_h, -d_h
    n1 = np.linalg.norm(hidden, axis=1)
    n2 = np.linalg.norm(hidden_pert, axis=1)
    ok = (n1 > _COSINE_NORM_FLOOR) & (n2 > _COSINE_NORM_FLOOR)
    losses = np.zeros(hidden.shape[0])
    d_h = np.zeros_like(hidden)
    d_hp = np.zeros_like(hidden)
    if np.any(ok):
        h = hidden[ok]
        hp = hidden_pert[ok]
        a = n1[ok][:, None]
        b = n2[ok][:, None]
        dot = np.sum(h * hp, axis=1, keepdims=True)
        cos = dot / (a * b)
        losses[ok] = 1.0 - cos[:, 0]
        d_h[ok] = -(hp / (a * b) - cos * h / (a * a))
        d_hp[ok] = -(h / (a * b) - cos * hp / (b * b))
    return losses, d_h, d_hp


def backward(
    model: Model,
    images: list[Image],
    labels: np.ndarray,
    loss_cfg: LossConfig,
    rng: Rng,
    perturbation: scenarios.Scenario | None = None,
) -> tuple[dict, dict]:
    """Analytic gradients of the mean total loss over one batch.

    When the feature criterion is active, each image's perturbed twin is
    generated here with a seed split from ``rng`` by batch position, so
    a caller that passes an identically-seeded rng reproduces the exact
    same twins (this is what the finite-difference check relies on).
    The feature-loss gradient flows through both forward passes.
    """
    if not images:
        raise ParameterError("backward needs a nonempty batch")
    labels = np.asarray(labels, dtype=np.float64)
    n = len(images)
    x = np.stack([model.preprocess(img) for img in images])
    hidden, logits = model._forward_batch(x)

    probs = sigmoid(logits)
    cls_losses = np.maximum(logits, 0.0) - logits * labels + np.log1p(np.exp(-np.abs(logits)))
    d_logits = loss_cfg.lambda1 * (probs - labels) / n

    mean_ft = 0.0
    d_hidden = d_logits[:, None] * model.w2[None, :]
    grads = {}
    if loss_cfg.ft_kind != FT_NONE:
        pert = perturbation or scenarios.builtin_scenario("combined")
        twins = [
            apply_twin(pert, img, rng.split(("ft-twin", i)).seed)
            for i, img in enumerate(images)
        ]
        x_pert = np.stack([model.preprocess(img) for img in twins])
        hidden_pert, _ = model._forward_batch(x_pert)
        ft_losses, d_h_ft, d_hp_ft = _ft_terms(hidden, hidden_pert, loss_cfg.ft_kind)
        mean_ft = float(ft_losses.mean())
        d_hidden = d_hidden + (loss_cfg.lambda2 / n) * d_h_ft
        d_pre_pert = ((loss_cfg.lambda2 / n) * d_hp_ft) * (1.0 - hidden_pert * hidden_pert)
        grads["w1"] = d_pre_pert.T @ x_pert
        grads["b1"] = d_pre_pert.sum(axis=0)

    d_pre = d_hidden * (1.0 - hidden * hidden)
    grads["w1"] = grads.get("w1", 0.0) + d_pre.T @ x
    grads["b1"] = grads.get("b1", 0.0) + d_pre.sum(axis=0)
    grads["w2"] = hidden.T @ d_logits
    grads["b2"] = float(d_logits.sum())

    mean_cls = float(cls_losses.mean())
    breakdown = {
        "cls": mean_cls,
        "ft": mean_ft,
        "total": total_loss(mean_cls, mean_ft, loss_cfg),
    }
    return grads, breakdown


def apply_twin(pert: scenarios.Scenario, image: Image, twin_index: int) -> Image:
    return scenarios.apply_scenario(pert, image, twin_index)


class Adam:
    """Standard bias-corrected Adam over the model's four parameter blocks."""

    def __init__(self, cfg: TrainConfig):
        self.beta1 = cfg.adam_beta1
        self.beta2 = cfg.adam_beta2
        self.eps = cfg.adam_eps
        self.t = 0
        self.m = {"w1": 0.0, "b1": 0.0, "w2": 0.0, "b2": 0.0}
        self.v = {"w1": 0.0, "b1": 0.0, "w2": 0.0, "b2": 0.0}

    def step(self, model: Model, grads: dict, lr: float) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for name in ("w1", "b1", "w2", "b2"):
            g = grads[name]
            self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * (g * g)
            update = lr * (self.m[name] / bc1) / (np.sqrt(self.v[name] / bc2) + self.eps)
            if name == "b2":
                model.b2 = float(model.b2 - update)
            else:
                current = getattr(model, name)
                setattr(model, name, current - update)


def _validation_accuracy(model: Model, x_val: np.ndarray, y_val: np.ndarray) -> float:
    _, logits = model._forward_batch(x_val)
    return float(((logits > 0).astype(np.int64) == y_val).mean())


def learning_rate(cfg: TrainConfig, epoch: int) -> float:
    return cfg.lr0 * cfg.lr_decay_factor ** (epoch // cfg.lr_decay_every)


def train(train_set, val_set, cfg: TrainConfig, loss_cfg: LossConfig) -> tuple[Model, TrainHistory]:
    """Adam training with per-sample pipeline augmentation and early stopping.

    Augmentation seeds are split per (epoch, sample index) and feature
    twins per (epoch, batch), so the run is a pure function of the
    configs. The returned model carries the best-validation-epoch
    weights.
    """
    if len(train_set.images) == 0 or len(val_set.images) == 0:
        raise ParameterError("train and validation sets must be nonempty")
    rng = Rng(cfg.seed)
    model = Model.init(rng.split("init"))
    optimizer = Adam(cfg)
    history = TrainHistory()

    x_val = np.stack([model.preprocess(img) for img in val_set.images])
    y_val = np.asarray(val_set.labels, dtype=np.int64)
    labels = np.asarray(train_set.labels, dtype=np.float64)
    n = len(train_set.images)
    ft_active = loss_cfg.ft_kind != FT_NONE
    pert = cfg.ft_scenario() if ft_active else None

    best_acc = -np.inf
    best_model = model.copy()
    bad_epochs = 0

    for epoch in range(cfg.epochs):
        lr = learning_rate(cfg, epoch)
        if lr <= cfg.lr_floor:
            history.stop_reason = "lr_floor"
            break
        order = rng.split(("shuffle", epoch)).shuffled_indices(n)
        sums = {"total": 0.0, "cls": 0.0, "ft": 0.0}
        for start in range(0, n, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            imgs = [
                augment.apply_pipeline(
                    cfg.train_augmentations, train_set.images[j], rng.split(("aug", epoch, j))
                )
                for j in batch
            ]
            batch_rng = rng.split(("ft", epoch, start))
            grads, breakdown = backward(model, imgs, labels[batch], loss_cfg, batch_rng, pert)
            optimizer.step(model, grads, lr)
            for key in sums:
                sums[key] += breakdown[key] * len(batch)

        val_acc = _validation_accuracy(model, x_val, y_val)
        history.epochs.append(
            EpochStats(
                epoch=epoch,
                mean_total_loss=sums["total"] / n,
                mean_cls_loss=sums["cls"] / n,
                mean_ft_loss=sums["ft"] / n,
                val_accuracy=val_acc,
                lr=lr,
            )
        )
        if val_acc > best_acc:
            best_acc = val_acc
            best_model = model.copy()
            history.best_epoch = epoch
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= cfg.early_stop_patience:
                history.stop_reason = "early_stop"
                break

    return best_model, history


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------


def save_checkpoint(model: Model, path, meta: dict | None = None) -> None:
    """Versioned header + all weights as 64-bit little-endian floats."""
    header = {
        "n_input": N_INPUT,
        "n_hidden": N_HIDDEN,
        "meta": meta or {},
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_CHECKPOINT_MAGIC)
        fh.write(struct.pack("<IQ", _CHECKPOINT_VERSION, len(blob)))
        fh.write(blob)
        for arr in (model.w1, model.b1, model.w2, np.array([model.b2])):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[Model, dict]:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except FileNotFoundError as exc:
        raise MissingFileError(f"no such checkpoint: {path}") from exc
    if raw[:8] != _CHECKPOINT_MAGIC:
        raise MalformedImageError(f"{path}: not a sidaug checkpoint")
    version, header_len = struct.unpack_from("<IQ", raw, 8)
    if version != _CHECKPOINT_VERSION:
        raise MalformedImageError(f"{path}: unsupported checkpoint version {version}")
    header = json.loads(raw[20:20 + header_len].decode("utf-8"))
    if header["n_input"] != N_INPUT or header["n_hidden"] != N_HIDDEN:
        raise MalformedImageError(f"{path}: checkpoint dims do not match this build")
    body = np.frombuffer(raw[20 + header_len:], dtype="<f8")
    expected = N_HIDDEN * N_INPUT + N_HIDDEN + N_HIDDEN + 1
    if body.size != expected:
        raise MalformedImageError(f"{path}: weight payload has {body.size} floats, want {expected}")
    w1 = body[: N_HIDDEN * N_INPUT].reshape(N_HIDDEN, N_INPUT).copy()
    off = N_HIDDEN * N_INPUT
    b1 = body[off:off + N_HIDDEN].copy()
    w2 = body[off + N_HIDDEN:off + 2 * N_HIDDEN].copy()
    b2 = float(body[-1])
    return Model(w1, b1, w2, b2), header["meta"]


def train_config_echo(cfg: TrainConfig) -> dict:
    """JSON-friendly snapshot of a TrainConfig for checkpoint headers."""
    echo = {}
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if f.name == "train_augmentations":
            echo[f.name] = value.to_config()
        elif f.name == "perturbation_for_ft":
            echo[f.name] = None if value is None else value.to_config()
        else:
            echo[f.name] = value
    return echo
