"""Hot numeric kernels with selectable backend.

Two interchangeable backends implement the same three primitives:

* ``native``  - Cython extension (``sidaug.kernels.native``)
* ``python``  - pure numpy reference (``sidaug.kernels.pyref``)

The compiled backend is preferred when importable; set
``SIDAUG_KERNELS=python`` or ``SIDAUG_KERNELS=native`` to force one.
Both produce bit-identical float64 results (enforced by tests), so the
choice only affects speed. ``benchmarks/bench_kernels.py`` compares them.
"""

from __future__ import annotations

import math
import os

import numpy as np

from ..errors import ParameterError
from . import pyref

_native = None
_requested = os.environ.get("SIDAUG_KERNELS", "auto")
if _requested not in ("auto", "native", "python"):
    raise ParameterError(f"SIDAUG_KERNELS must be auto|native|python, got {_requested!r}")
if _requested in ("auto", "native"):
    try:
        from . import native as _native  # type: ignore[attr-defined]
    except ImportError:
        if _requested == "native":
            raise ParameterError("SIDAUG_KERNELS=native but the compiled backend is not built")
        _native = None

_backend = _native if _native is not None else pyref

BACKEND = _backend.NAME


def available_backends() -> list:
    backends = [pyref]
    if _native is not None:
        backends.append(_native)
    return backends


# Orthonormal 8-point DCT-II matrix, shared verbatim with the compiled
# backend so both quantize identical coefficients.
_C = np.full(8, math.sqrt(2.0 / 8.0))
_C[0] = math.sqrt(1.0 / 8.0)
DCT8 = np.ascontiguousarray(
    _C[:, None] * np.cos((2.0 * np.arange(8)[None, :] + 1.0) * np.arange(8)[:, None] * math.pi / 16.0)
)

# JPEG Annex K base quantization tables.
QTAB_LUMA = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.float64,
)
QTAB_CHROMA = np.array(
    [
        [17, 18, 24, 47, 99, 99, 99, 99],
        [18, 21, 26, 66, 99, 99, 99, 99],
        [24, 26, 56, 99, 99, 99, 99, 99],
        [47, 66, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
    ],
    dtype=np.float64,
)


def quantization_tables(qf: int) -> tuple[np.ndarray, np.ndarray]:
    """Annex K tables scaled by the conventional quality formula.

    scale = 5000/qf below 50 else 200 - 2*qf; entries floor((q*scale+50)/100)
    clamped to [1, 255]. qf=100 therefore clamps every entry to 1.
    """
    if not 1 <= qf <= 100:
        raise ParameterError(f"jpeg quality factor must be in [1, 100], got {qf}")
    scale = 5000.0 / qf if qf < 50 else 200.0 - 2.0 * qf
    tables = []
    for base in (QTAB_LUMA, QTAB_CHROMA):
        t = np.floor((base * scale + 50.0) / 100.0)
        tables.append(np.clip(t, 1.0, 255.0))
    return tables[0], tables[1]


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Sampled Gaussian, radius ceil(3*sigma), normalized to unit sum."""
    if sigma < 0.0:
        raise ParameterError(f"gaussian sigma must be >= 0, got {sigma}")
    if sigma == 0.0:
        return np.ones(1)
    radius = math.ceil(3.0 * sigma)
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    w = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return w / w.sum()


BOX3 = np.full(3, 1.0 / 3.0)


def _as_plane_stack(arr: np.ndarray) -> np.ndarray:
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return np.ascontiguousarray(arr, dtype=np.float64)


def sep_conv(arr: np.ndarray, weights: np.ndarray, backend=None) -> np.ndarray:
    """Separable convolution with reflect-101 borders; kernel must fit the image."""
    squeeze = arr.ndim == 2
    arr = _as_plane_stack(arr)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    r = (weights.shape[0] - 1) // 2
    if r >= min(arr.shape[0], arr.shape[1]):
        raise ParameterError(
            f"kernel radius {r} too large for {arr.shape[0]}x{arr.shape[1]} image"
        )
    out = (backend or _backend).sep_conv(arr, weights)
    return out[:, :, 0] if squeeze else out


def resize_bilinear(arr: np.ndarray, out_h: int, out_w: int, backend=None) -> np.ndarray:
    if out_h < 1 or out_w < 1:
        raise ParameterError(f"resize target must be positive, got {out_h}x{out_w}")
    squeeze = arr.ndim == 2
    arr = _as_plane_stack(arr)
    out = (backend or _backend).resize_bilinear(arr, int(out_h), int(out_w))
    return out[:, :, 0] if squeeze else out


def jpeg_plane_roundtrip(plane: np.ndarray, qtab: np.ndarray, backend=None) -> np.ndarray:
    """Quantization round trip of one level-shifted plane (any size >= 1)."""
    plane = np.ascontiguousarray(plane, dtype=np.float64)
    h, w = plane.shape
    pad_y = (-h) % 8
    pad_x = (-w) % 8
    padded = np.pad(plane, ((0, pad_y), (0, pad_x)), mode="symmetric")
    padded = np.ascontiguousarray(padded)
    qtab = np.ascontiguousarray(qtab, dtype=np.float64)
    out = (backend or _backend).jpeg_blocks(padded, qtab, DCT8)
    return out[:h, :w]
