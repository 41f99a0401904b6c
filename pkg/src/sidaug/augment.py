"""Image augmentation operators and seeded pipeline composition.

The pool has 14 operator kinds. Horizontal flip and random crop are
unconditional best-practice transforms and are not part of the search
space; the remaining 12 are searchable. The two policy stubs
(AutoPolicyStub / RandPolicyStub) stand for externally-defined policy
families: they are declared so search configs can name them, but they
refuse to execute.

All operators are pure functions of (inputs, rng) and return new Image
values with samples clamped to [0, 1].
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import ParameterError, StubOperatorError
from .image import Image, clamp01
from .rng import Rng


class OperatorKind(enum.Enum):
    """Canonical pipeline order is the declaration order below."""

    HorizontalFlip = 0
    RandomCrop = 1
    JpegCompress = 2
    GaussianBlur = 3
    GaussianNoise = 4
    Sharpen = 5
    Contrast = 6
    ColorJitter = 7
    Grayscale = 8
    ColorInvert = 9
    AutoPolicyStub = 10
    RandPolicyStub = 11
    ResizeLarge = 12
    ResizeSmall = 13


# The searchable pool, in canonical order (flip and crop excluded).
SEARCHABLE_KINDS: tuple[OperatorKind, ...] = tuple(
    k for k in OperatorKind if k not in (OperatorKind.HorizontalFlip, OperatorKind.RandomCrop)
)
STUB_KINDS = (OperatorKind.AutoPolicyStub, OperatorKind.RandPolicyStub)


@dataclass(frozen=True)
class OperatorParams:
    """Per-operator parameter ranges; defaults follow the studied pool.

    Noise sigma is expressed on the 8-bit (0-255) scale, where a range
    like [0, 2] is meaningful; it is divided by 255 when applied to the
    normalized samples.
    """

    jpeg_qf_range: tuple[int, int] = (30, 100)
    blur_sigma_range: tuple[float, float] = (0.0, 3.0)
    noise_sigma_range: tuple[float, float] = (0.0, 2.0)
    sharpen_factor: float = 2.0
    contrast_factor_range: tuple[float, float] = (0.5, 1.5)
    brightness_range: tuple[float, float] = (0.75, 1.25)
    contrast_jitter_range: tuple[float, float] = (0.75, 1.25)
    saturation_range: tuple[float, float] = (0.75, 1.25)
    hue_range: tuple[float, float] = (-0.05, 0.05)
    crop_size: int = 64
    resize_large: int = 64
    resize_small: int = 32
    apply_prob: float = 0.5

    def validate(self) -> None:
        for name in (
            "jpeg_qf_range",
            "blur_sigma_range",
            "noise_sigma_range",
            "contrast_factor_range",
            "brightness_range",
            "contrast_jitter_range",
            "saturation_range",
            "hue_range",
        ):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ParameterError(f"{name} is empty: [{lo}, {hi}]")
        if not (1 <= self.jpeg_qf_range[0] and self.jpeg_qf_range[1] <= 100):
            raise ParameterError(f"jpeg_qf_range must lie within [1, 100], got {self.jpeg_qf_range}")
        if self.blur_sigma_range[0] < 0 or self.noise_sigma_range[0] < 0:
            raise ParameterError("sigma ranges must be non-negative")
        if not 0.0 <= self.apply_prob <= 1.0:
            raise ParameterError(f"apply_prob must be in [0, 1], got {self.apply_prob}")
        if self.sharpen_factor < 0:
            raise ParameterError(f"sharpen_factor must be >= 0, got {self.sharpen_factor}")
        if self.contrast_factor_range[0] <= 0:
            raise ParameterError("contrast factors must be positive")
        if min(self.crop_size, self.resize_large, self.resize_small) < 8:
            raise ParameterError("crop/resize sizes below 8 px are not supported")


@dataclass(frozen=True)
class AugmentationSet:
    """Binary inclusion vector over the 12 searchable operators, plus params.

    Flip and crop are implicit: flip always runs (p=0.5 internally) and
    crop runs unless ResizeLarge is enabled, matching the rule that the
    large-resize variant skips prior cropping.
    """

    enabled: tuple[bool, ...] = (False,) * len(SEARCHABLE_KINDS)
    params: OperatorParams = field(default_factory=OperatorParams)

    def __post_init__(self):
        if len(self.enabled) != len(SEARCHABLE_KINDS):
            raise ParameterError(
                f"enabled vector must have length {len(SEARCHABLE_KINDS)}, got {len(self.enabled)}"
            )
        object.__setattr__(self, "enabled", tuple(bool(b) for b in self.enabled))
        self.params.validate()

    @classmethod
    def from_kinds(cls, kinds, params: OperatorParams | None = None) -> "AugmentationSet":
        kinds = set(kinds)
        unknown = kinds - set(SEARCHABLE_KINDS)
        if unknown:
            names = ", ".join(sorted(k.name for k in unknown))
            raise ParameterError(f"not searchable operators: {names}")
        enabled = tuple(k in kinds for k in SEARCHABLE_KINDS)
        return cls(enabled, params or OperatorParams())

    def enabled_kinds(self) -> tuple[OperatorKind, ...]:
        return tuple(k for k, on in zip(SEARCHABLE_KINDS, self.enabled) if on)

    def is_enabled(self, kind: OperatorKind) -> bool:
        return kind in self.enabled_kinds()

    def to_config(self) -> dict:
        """Human-readable block: operator names + snake_case parameters."""
        return {
            "operators": [k.name for k in self.enabled_kinds()],
            "params": {
                "jpeg_qf_range": list(self.params.jpeg_qf_range),
                "blur_sigma_range": list(self.params.blur_sigma_range),
                "noise_sigma_range": list(self.params.noise_sigma_range),
                "sharpen_factor": self.params.sharpen_factor,
                "contrast_factor_range": list(self.params.contrast_factor_range),
                "brightness_range": list(self.params.brightness_range),
                "contrast_jitter_range": list(self.params.contrast_jitter_range),
                "saturation_range": list(self.params.saturation_range),
                "hue_range": list(self.params.hue_range),
                "crop_size": self.params.crop_size,
                "resize_large": self.params.resize_large,
                "resize_small": self.params.resize_small,
                "apply_prob": self.params.apply_prob,
            },
        }

    @classmethod
    def from_config(cls, block: dict) -> "AugmentationSet":
        if not isinstance(block, dict):
            raise ParameterError("augmentation block must be a mapping")
        unknown = set(block) - {"operators", "params"}
        if unknown:
            raise ParameterError(f"unknown augmentation keys: {sorted(unknown)}")
        kinds = []
        for name in block.get("operators", []):
            try:
                kinds.append(OperatorKind[name])
            except KeyError:
                raise ParameterError(f"unknown operator name: {name!r}") from None
        params = OperatorParams()
        raw = block.get("params", {}) or {}
        valid = set(params.__dataclass_fields__)
        unknown = set(raw) - valid
        if unknown:
            raise ParameterError(f"unknown augmentation params: {sorted(unknown)}")
        coerced = {}
        for key, value in raw.items():
            if key.endswith("_range"):
                coerced[key] = tuple(value)
            elif key in ("crop_size", "resize_large", "resize_small"):
                coerced[key] = int(value)
            else:
                coerced[key] = float(value)
        if "jpeg_qf_range" in coerced:
            coerced["jpeg_qf_range"] = tuple(int(v) for v in coerced["jpeg_qf_range"])
        return cls.from_kinds(kinds, replace(params, **coerced))


# ---------------------------------------------------------------------------
# individual operators
# ---------------------------------------------------------------------------


def gaussian_blur(image: Image, sigma: float) -> Image:
    """Separable truncated-Gaussian blur; sigma=0 is the identity."""
    if sigma < 0:
        raise ParameterError(f"blur sigma must be >= 0, got {sigma}")
    if sigma == 0.0:
        return Image(image.data.copy())
    w = kernels.gaussian_kernel(sigma)
    return Image(clamp01(kernels.sep_conv(image.data, w)))


def gaussian_noise(image: Image, sigma_8bit: float, rng: Rng) -> Image:
    """Add i.i.d. normal noise of the given 8-bit-scale sigma, then clamp."""
    if sigma_8bit < 0:
        raise ParameterError(f"noise sigma must be >= 0, got {sigma_8bit}")
    if sigma_8bit == 0.0:
        return Image(image.data.copy())
    noise = rng.normal_array(image.data.size).reshape(image.data.shape)
    return Image(clamp01(image.data + noise * (sigma_8bit / 255.0)))


def jpeg_compress(image: Image, qf: int) -> Image:
    """In-memory JPEG quantization round trip (no entropy coding).

    RGB -> YCbCr, 8x8 orthonormal DCT per channel at 4:4:4, Annex-K
    tables scaled by the quality factor, dequantize, inverse transform,
    back to RGB, clamp. One-channel images run the luma path only.
    """
    if not isinstance(qf, (int, np.integer)):
        raise ParameterError(f"jpeg quality factor must be an integer, got {qf!r}")
    qluma, qchroma = kernels.quantization_tables(int(qf))
    x = image.data * 255.0
    if image.channels == 1:
        y = kernels.jpeg_plane_roundtrip(x[:, :, 0] - 128.0, qluma)
        return Image(clamp01((y + 128.0)[:, :, None] / 255.0))

    r, g, b = x[:, :, 0], x[:, :, 1], x[:, :, 2]
    yy = 0.299 * r + 0.587 * g + 0.114 * b - 128.0
    cb = -0.168735892 * r - 0.331264108 * g + 0.5 * b
    cr = 0.5 * r - 0.418687589 * g - 0.081312411 * b

    yy = kernels.jpeg_plane_roundtrip(yy, qluma) + 128.0
    cb = kernels.jpeg_plane_roundtrip(cb, qchroma)
    cr = kernels.jpeg_plane_roundtrip(cr, qchroma)

    out = np.empty_like(x)
    out[:, :, 0] = yy + 1.402 * cr
    out[:, :, 1] = yy - 0.344136286 * cb - 0.714136286 * cr
    out[:, :, 2] = yy + 1.772 * cb
    return Image(clamp01(out / 255.0))


def sharpen(image: Image, factor: float) -> Image:
    """Unsharp mask against a sigma-1 blur; factor=1 is the identity."""
    if factor < 0:
        raise ParameterError(f"sharpen factor must be >= 0, got {factor}")
    if factor == 1.0:
        return Image(image.data.copy())
    blurred = kernels.sep_conv(image.data, kernels.gaussian_kernel(1.0))
    return Image(clamp01(image.data + (factor - 1.0) * (image.data - blurred)))


def adjust_contrast(image: Image, factor: float) -> Image:
    """Scale deviations from the image's mean gray value."""
    if factor <= 0:
        raise ParameterError(f"contrast factor must be > 0, got {factor}")
    mean = float(image.luma().mean())
    return Image(clamp01(mean + factor * (image.data - mean)))


def grayscale(image: Image) -> Image:
    """Replace each channel with the luma plane (channel count kept)."""
    if image.channels == 1:
        return Image(image.data.copy())
    luma = image.luma()
    return Image(np.repeat(luma[:, :, None], 3, axis=2))


def color_invert(image: Image) -> Image:
    return Image(1.0 - image.data)


def _adjust_brightness(data: np.ndarray, factor: float) -> np.ndarray:
    return clamp01(factor * data)


def _adjust_saturation(data: np.ndarray, factor: float) -> np.ndarray:
    luma = 0.299 * data[:, :, 0] + 0.587 * data[:, :, 1] + 0.114 * data[:, :, 2]
    return clamp01(luma[:, :, None] + factor * (data - luma[:, :, None]))


def _rotate_hue(data: np.ndarray, turns: float) -> np.ndarray:
    """Rotate the chroma plane by ``turns`` of a full revolution.

    Luma-preserving rotation in the YCbCr chroma plane; equivalent in
    effect to an HSV hue shift and exactly invertible before clamping.
    """
    r, g, b = data[:, :, 0], data[:, :, 1], data[:, :, 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = -0.168735892 * r - 0.331264108 * g + 0.5 * b
    cr = 0.5 * r - 0.418687589 * g - 0.081312411 * b
    angle = 2.0 * math.pi * turns
    ca, sa = math.cos(angle), math.sin(angle)
    cb2 = ca * cb - sa * cr
    cr2 = sa * cb + ca * cr
    out = np.empty_like(data)
    out[:, :, 0] = y + 1.402 * cr2
    out[:, :, 1] = y - 0.344136286 * cb2 - 0.714136286 * cr2
    out[:, :, 2] = y + 1.772 * cb2
    return clamp01(out)


def color_jitter(image: Image, rng: Rng, params: OperatorParams) -> Image:
    """Brightness/contrast/saturation/hue jitter in rng-shuffled order.

    Draw order: one shuffle of the four sub-operators, then one uniform
    factor immediately before each sub-operator is applied.
    """
    if image.channels != 3:
        raise ParameterError("color_jitter requires a 3-channel image")
    order = rng.shuffled_indices(4)
    data = image.data
    for idx in order:
        if idx == 0:
            data = _adjust_brightness(data, rng.uniform(*params.brightness_range))
        elif idx == 1:
            factor = rng.uniform(*params.contrast_jitter_range)
            mean = float((0.299 * data[:, :, 0] + 0.587 * data[:, :, 1] + 0.114 * data[:, :, 2]).mean())
            data = clamp01(mean + factor * (data - mean))
        elif idx == 2:
            data = _adjust_saturation(data, rng.uniform(*params.saturation_range))
        else:
            data = _rotate_hue(data, rng.uniform(*params.hue_range))
    return Image(data)


def mirror_horizontal(image: Image) -> Image:
    """Deterministic column mirror (the forced-apply flip)."""
    return Image(np.ascontiguousarray(image.data[:, ::-1, :]))


def horizontal_flip(image: Image, rng: Rng) -> Image:
    """Mirror columns with probability 0.5 (one Bernoulli draw always)."""
    if rng.bernoulli(0.5):
        return mirror_horizontal(image)
    return Image(image.data.copy())


def random_crop(image: Image, size: int, rng: Rng) -> Image:
    """Uniform-random aligned square window. Draws row offset, then column."""
    if size > min(image.height, image.width):
        raise ParameterError(
            f"crop size {size} exceeds image {image.height}x{image.width}"
        )
    oy = rng.randint(image.height - size + 1)
    ox = rng.randint(image.width - size + 1)
    return Image(np.ascontiguousarray(image.data[oy:oy + size, ox:ox + size, :]))


def resize(image: Image, target: int) -> Image:
    """Bilinear resample to target x target."""
    if target < 8:
        raise ParameterError(f"resize target must be >= 8, got {target}")
    return Image(clamp01(kernels.resize_bilinear(image.data, target, target)))


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


def apply_pipeline(aug_set: AugmentationSet, image: Image, rng: Rng) -> Image:
    """Apply one seeded augmentation pipeline pass.

    Deterministic draw order, for reproducing compositions externally:

    1. flip Bernoulli(0.5), apply on success;
    2. crop row offset then column offset (skipped entirely when
       ResizeLarge is enabled);
    3. for each *enabled* searchable operator in canonical order, one
       Bernoulli(apply_prob) gate, then that operator's parameter draws
       and application if the gate fired. Resize kinds sit at the end of
       the canonical order, so a fired resize always runs last.

    Disabled operators consume no draws.
    """
    for stub in STUB_KINDS:
        if aug_set.is_enabled(stub):
            raise StubOperatorError(
                f"{stub.name} is declared but not executable; disable it to run pipelines"
            )
    p = aug_set.params
    out = horizontal_flip(image, rng)
    if not aug_set.is_enabled(OperatorKind.ResizeLarge):
        out = random_crop(out, p.crop_size, rng)
    for kind in aug_set.enabled_kinds():
        if not rng.bernoulli(p.apply_prob):
            continue
        if kind is OperatorKind.JpegCompress:
            lo, hi = p.jpeg_qf_range
            out = jpeg_compress(out, lo + rng.randint(hi - lo + 1))
        elif kind is OperatorKind.GaussianBlur:
            out = gaussian_blur(out, rng.uniform(*p.blur_sigma_range))
        elif kind is OperatorKind.GaussianNoise:
            out = gaussian_noise(out, rng.uniform(*p.noise_sigma_range), rng)
        elif kind is OperatorKind.Sharpen:
            out = sharpen(out, p.sharpen_factor)
        elif kind is OperatorKind.Contrast:
            out = adjust_contrast(out, rng.uniform(*p.contrast_factor_range))
        elif kind is OperatorKind.ColorJitter:
            out = color_jitter(out, rng, p)
        elif kind is OperatorKind.Grayscale:
            out = grayscale(out)
        elif kind is OperatorKind.ColorInvert:
            out = color_invert(out)
        elif kind is OperatorKind.ResizeLarge:
            out = resize(out, p.resize_large)
        elif kind is OperatorKind.ResizeSmall:
            out = resize(out, p.resize_small)
    return out
