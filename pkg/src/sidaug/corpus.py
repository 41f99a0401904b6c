"""Procedural real-vs-synthetic corpus with a planted generator fingerprint.

"Real" images are band-limited colored noise textures: a 1/f^alpha
amplitude spectrum with a hard cutoff below the artifact band, plus
per-image brightness/contrast jitter and per-dataset color statistics.
"Synthetic" images are the same textures plus a periodic grid pattern
(two orthogonal cosine gratings at the configured period) with uniform
random phase per image - the stand-in for an upsampling fingerprint.

Because the grid lives above the texture cutoff, high-frequency
perturbations (blur, JPEG, resampling) erode exactly the evidence that
separates the classes, which is what recreates the robustness gap under
the evaluation scenarios.

All samples are snapped to the 8-bit grid (k/255), mirroring how such
corpora exist on disk; generation is deterministic in the config seed
and every eval dataset uses its own texture family.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import MalformedImageError, MissingFileError, ParameterError
from .image import Image, clamp01, load_image, save_image
from .rng import Rng

DEFAULT_VAL_FRACTION = 0.1


@dataclass(frozen=True)
class TextureFamily:
    """Spectral and color statistics of one dataset's textures."""

    name: str
    alpha: float  # amplitude spectrum exponent
    contrast: float  # luma field scale
    chroma: float  # chroma field scale
    cutoff: float  # band limit, cycles/px


# The train family is deliberately distinct from every eval family.
TRAIN_FAMILY = TextureFamily("train", alpha=2.3, contrast=0.12, chroma=0.05, cutoff=0.14)
EVAL_FAMILIES = (
    TextureFamily("eval-smooth", alpha=2.6, contrast=0.12, chroma=0.04, cutoff=0.15),
    TextureFamily("eval-rough", alpha=1.5, contrast=0.10, chroma=0.06, cutoff=0.19),
    TextureFamily("eval-flat", alpha=2.2, contrast=0.17, chroma=0.03, cutoff=0.13),
    TextureFamily("eval-fine", alpha=1.8, contrast=0.13, chroma=0.08, cutoff=0.20),
    TextureFamily("eval-soft", alpha=2.4, contrast=0.15, chroma=0.05, cutoff=0.16),
    TextureFamily("eval-grain", alpha=1.7, contrast=0.11, chroma=0.07, cutoff=0.18),
)


@dataclass(frozen=True)
class CorpusConfig:
    n_train_per_class: int = 2000
    n_eval_per_class: int = 500
    image_size: int = 96
    artifact_amplitude: float = 0.08
    artifact_period: int = 4
    n_eval_datasets: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.n_train_per_class < 1 or self.n_eval_per_class < 1:
            raise ParameterError("per-class counts must be positive")
        if self.image_size < 16:
            raise ParameterError(f"image_size must be >= 16, got {self.image_size}")
        if not 0.0 <= self.artifact_amplitude <= 1.0:
            raise ParameterError("artifact_amplitude must lie in [0, 1]")
        if self.artifact_period < 2 or self.artifact_period > self.image_size // 2:
            raise ParameterError("artifact_period must be in [2, image_size/2]")
        if not 1 <= self.n_eval_datasets <= len(EVAL_FAMILIES):
            raise ParameterError(f"n_eval_datasets must be in [1, {len(EVAL_FAMILIES)}]")


@dataclass(frozen=True)
class LabeledDataset:
    """Images with 0=real / 1=synthetic labels; labels interleave by index."""

    images: list[Image]
    labels: np.ndarray
    name: str

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.images) != labels.size:
            raise ParameterError("images and labels must have equal length")
        if labels.size == 0:
            raise ParameterError(f"dataset {self.name!r} must be nonempty")
        if labels.min() == labels.max():
            raise ParameterError(f"dataset {self.name!r} must contain both classes")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.images)


_SPECTRUM_CACHE: dict = {}


def _spectrum_filter(size: int, alpha: float, cutoff: float) -> np.ndarray:
    """Radial amplitude filter for rfft2: 1/f^(alpha/2) inside the band."""
    key = (size, alpha, cutoff)
    cached = _SPECTRUM_CACHE.get(key)
    if cached is not None:
        return cached
    fy = np.fft.fftfreq(size)[:, None]
    fx = np.fft.rfftfreq(size)[None, :]
    f = np.hypot(fy, fx)
    f_floor = 1.0 / size
    shaped = 1.0 / np.maximum(f, f_floor) ** (alpha / 2.0)
    shaped[f > cutoff] = 0.0
    shaped[0, 0] = 0.0
    _SPECTRUM_CACHE[key] = shaped
    return shaped


def _noise_field(rng: Rng, size: int, alpha: float, cutoff: float) -> np.ndarray:
    """Unit-variance band-limited noise field."""
    white = rng.normal_array(size * size).reshape(size, size)
    shaped = np.fft.irfft2(np.fft.rfft2(white) * _spectrum_filter(size, alpha, cutoff), s=(size, size))
    std = shaped.std()
    if std < 1e-12:
        return np.zeros_like(shaped)
    return (shaped - shaped.mean()) / std


def _generate_image(family: TextureFamily, synthetic: bool, rng: Rng, cfg: CorpusConfig) -> Image:
    size = cfg.image_size
    base = rng.uniform(0.35, 0.65)
    contrast = family.contrast * rng.uniform(0.6, 1.4)
    luma = base + contrast * _noise_field(rng.split("luma"), size, family.alpha, family.cutoff)

    chroma_field = _noise_field(rng.split("chroma"), size, family.alpha + 0.8, family.cutoff)
    tint = np.array([rng.uniform(-1.0, 1.0) for _ in range(3)])
    tint -= tint.mean()
    data = luma[:, :, None] + (family.chroma * chroma_field)[:, :, None] * tint[None, None, :]

    if synthetic:
        art = rng.split("artifact")
        period = float(cfg.artifact_period)
        phase_x = art.uniform(0.0, period)
        phase_y = art.uniform(0.0, period)
        xs = np.arange(size, dtype=np.float64)
        gx = np.cos(2.0 * math.pi * (xs + phase_x) / period)
        gy = np.cos(2.0 * math.pi * (xs + phase_y) / period)
        grid = 0.5 * (gx[None, :] + gy[:, None])
        data = data + cfg.artifact_amplitude * grid[:, :, None]

    quantized = np.rint(clamp01(data) * 255.0) / 255.0
    return Image(quantized)


def _generate_dataset(name: str, family: TextureFamily, n_per_class: int, rng: Rng, cfg: CorpusConfig) -> LabeledDataset:
    images = []
    labels = np.empty(2 * n_per_class, dtype=np.int64)
    for i in range(2 * n_per_class):
        label = i % 2
        labels[i] = label
        images.append(_generate_image(family, bool(label), rng.split(("img", i)), cfg))
    return LabeledDataset(images=images, labels=labels, name=name)


def generate_corpus(cfg: CorpusConfig) -> tuple[LabeledDataset, list[LabeledDataset]]:
    """Build the train set and the per-family eval sets."""
    root = Rng(cfg.seed)
    train = _generate_dataset("train", TRAIN_FAMILY, cfg.n_train_per_class, root.split("train"), cfg)
    eval_sets = [
        _generate_dataset(
            EVAL_FAMILIES[k].name,
            EVAL_FAMILIES[k],
            cfg.n_eval_per_class,
            root.split(("eval", k)),
            cfg,
        )
        for k in range(cfg.n_eval_datasets)
    ]
    return train, eval_sets


def split_train_val(dataset: LabeledDataset, val_fraction: float = DEFAULT_VAL_FRACTION) -> tuple[LabeledDataset, LabeledDataset]:
    """Deterministic tail split; interleaved labels keep both halves balanced."""
    if not 0.0 < val_fraction < 1.0:
        raise ParameterError(f"val_fraction must be in (0, 1), got {val_fraction}")
    n_val = 2 * max(1, int(len(dataset) * val_fraction / 2))
    if n_val >= len(dataset):
        raise ParameterError("validation split would consume the whole dataset")
    cut = len(dataset) - n_val
    head = LabeledDataset(dataset.images[:cut], dataset.labels[:cut], dataset.name)
    tail = LabeledDataset(dataset.images[cut:], dataset.labels[cut:], f"{dataset.name}-val")
    return head, tail


def take_fraction(dataset: LabeledDataset, fraction: float) -> LabeledDataset:
    """Leading slice of a dataset (used for the reduced search-fitness corpus)."""
    if not 0.0 < fraction <= 1.0:
        raise ParameterError(f"fraction must be in (0, 1], got {fraction}")
    n = 2 * max(1, int(len(dataset) * fraction / 2))
    return LabeledDataset(dataset.images[:n], dataset.labels[:n], dataset.name)


# ---------------------------------------------------------------------------
# on-disk corpus
# ---------------------------------------------------------------------------


def write_corpus(train: LabeledDataset, eval_sets, out_dir) -> str:
    """Write every image as PPM plus a manifest (path, label, dataset)."""
    out_dir = os.fspath(out_dir)
    lines = []
    for ds in [train, *eval_sets]:
        sub = os.path.join(out_dir, ds.name)
        os.makedirs(sub, exist_ok=True)
        for i, (img, label) in enumerate(zip(ds.images, ds.labels)):
            rel = f"{ds.name}/img_{i:05d}.ppm"
            save_image(img, os.path.join(out_dir, rel))
            lines.append(f"{rel},{int(label)},{ds.name}")
    manifest = os.path.join(out_dir, "manifest.csv")
    with open(manifest, "w") as fh:
        fh.write("path,label,dataset\n")
        fh.write("\n".join(lines) + "\n")
    return manifest


def load_corpus(manifest_path) -> tuple[LabeledDataset, list[LabeledDataset]]:
    """Load a written corpus back; the train split is the dataset named 'train'."""
    try:
        with open(manifest_path) as fh:
            rows = fh.read().strip().splitlines()
    except FileNotFoundError as exc:
        raise MissingFileError(f"no such manifest: {manifest_path}") from exc
    if not rows or rows[0] != "path,label,dataset":
        raise MalformedImageError(f"{manifest_path}: not a corpus manifest")
    root = os.path.dirname(os.fspath(manifest_path))
    by_name: dict[str, tuple[list, list]] = {}
    order: list[str] = []
    for row in rows[1:]:
        parts = row.split(",")
        if len(parts) != 3:
            raise MalformedImageError(f"{manifest_path}: bad manifest row {row!r}")
        rel, label, name = parts
        if name not in by_name:
            by_name[name] = ([], [])
            order.append(name)
        images, labels = by_name[name]
        images.append(load_image(os.path.join(root, rel)))
        labels.append(int(label))
    datasets = {name: LabeledDataset(imgs, np.array(lbls), name) for name, (imgs, lbls) in by_name.items()}
    if "train" not in datasets:
        raise MalformedImageError(f"{manifest_path}: manifest has no train dataset")
    eval_sets = [datasets[name] for name in order if name != "train"]
    return datasets["train"], eval_sets
