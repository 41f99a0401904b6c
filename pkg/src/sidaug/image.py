"""Raster image type and lossless binary PPM/PGM file I/O.

Images are float64 buffers shaped (height, width, channels) in row-major,
channel-interleaved order with samples in [0, 1]. Everything downstream
(augmentation, the model, metrics) also runs in float64: the gradient
checks need the headroom and one uniform width keeps the numerics
reasoning simple.

Treat Image values as immutable: operators always allocate a new buffer,
so instances are safe to share across worker processes.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import IoError, MalformedImageError, MissingFileError, ParameterError, UnsupportedImageError


def clamp01(arr: np.ndarray) -> np.ndarray:
    """Clamp samples into [0, 1]; idempotent by construction."""
    return np.clip(arr, 0.0, 1.0)


@dataclass(frozen=True)
class Image:
    """Owned raster; ``data`` has shape (height, width, channels)."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 3 or d.shape[2] not in (1, 3):
            raise ParameterError(f"image data must be (h, w, 1|3), got shape {d.shape}")
        if d.shape[0] < 1 or d.shape[1] < 1:
            raise ParameterError(f"image dimensions must be positive, got {d.shape}")
        if d.dtype != np.float64 or not d.flags.c_contiguous:
            object.__setattr__(self, "data", np.ascontiguousarray(d, dtype=np.float64))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def samples(self) -> np.ndarray:
        """Flat row-major channel-interleaved view."""
        return self.data.reshape(-1)

    def luma(self) -> np.ndarray:
        """ITU-R 601 luma plane (h, w); identity for 1-channel images."""
        if self.channels == 1:
            return self.data[:, :, 0]
        d = self.data
        return 0.299 * d[:, :, 0] + 0.587 * d[:, :, 1] + 0.114 * d[:, :, 2]

    @classmethod
    def from_array(cls, arr: np.ndarray, clamp: bool = False) -> "Image":
        if arr.ndim == 2:
            arr = arr[:, :, None]
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        if clamp:
            arr = clamp01(arr)
        if not np.all(np.isfinite(arr)):
            raise ParameterError("image samples must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ParameterError("image samples must lie in [0, 1]; pass clamp=True to clip")
        return cls(arr)

    @classmethod
    def constant(cls, height: int, width: int, channels: int, value: float = 0.0) -> "Image":
        return cls.from_array(np.full((height, width, channels), value, dtype=np.float64))

    def quantized(self) -> "Image":
        """Snap samples to the 8-bit grid k/255, as a save/load round trip would."""
        return Image(np.rint(self.data * 255.0) / 255.0)


def _parse_netpbm_header(raw: bytes, path) -> tuple[bytes, int, int, int, int]:
    """Return (magic, width, height, maxval, payload offset).

    Netpbm headers are whitespace-separated tokens with '#' comments; a
    single whitespace byte separates maxval from the binary payload.
    """
    magic = raw[:2]
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos:pos + 1] == b"#":
            nl = raw.find(b"\n", pos)
            if nl < 0:
                raise MalformedImageError(f"{path}: unterminated header comment")
            pos = nl + 1
            continue
        start = pos
        while pos < len(raw) and raw[pos:pos + 1].isdigit():
            pos += 1
        if pos == start:
            raise MalformedImageError(f"{path}: malformed netpbm header")
        fields.append(int(raw[start:pos]))
    if pos >= len(raw) or not raw[pos:pos + 1].isspace():
        raise MalformedImageError(f"{path}: missing delimiter after maxval")
    return magic, fields[0], fields[1], fields[2], pos + 1


def save_image(image: Image, path: str | os.PathLike) -> None:
    """Write binary PGM (1 channel) or PPM (3 channels), 8-bit, maxval 255."""
    magic = b"P5" if image.channels == 1 else b"P6"
    payload = np.rint(image.data * 255.0).astype(np.uint8).tobytes()
    header = magic + b"\n%d %d\n255\n" % (image.width, image.height)
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(payload)
    except OSError as exc:
        raise IoError(f"cannot write image to {path}: {exc}") from exc


def load_image(path: str | os.PathLike) -> Image:
    """Read binary PGM/PPM; samples normalized to [0, 1] as value/255."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except FileNotFoundError as exc:
        raise MissingFileError(f"no such image file: {path}") from exc
    except OSError as exc:
        raise IoError(f"cannot read image from {path}: {exc}") from exc

    if raw[:2] in (b"P1", b"P2", b"P3", b"P4"):
        raise UnsupportedImageError(f"{path}: only binary P5/P6 netpbm files are supported")
    if raw[:2] not in (b"P5", b"P6"):
        raise MalformedImageError(f"{path}: not a binary PGM/PPM file")
    magic, width, height, maxval, offset = _parse_netpbm_header(raw, path)
    if maxval != 255:
        raise UnsupportedImageError(f"{path}: only 8-bit images supported, maxval={maxval}")
    if width < 1 or height < 1:
        raise MalformedImageError(f"{path}: bad dimensions {width}x{height}")
    channels = 1 if magic == b"P5" else 3
    body = raw[offset:]
    expected = width * height * channels
    if len(body) < expected:
        raise MalformedImageError(f"{path}: truncated payload ({len(body)} < {expected} bytes)")
    arr = np.frombuffer(body[:expected], dtype=np.uint8).astype(np.float64) / 255.0
    return Image(arr.reshape(height, width, channels))
