"""Pure-numpy kernel backend.

This is the reference implementation: the compiled backend must agree
with it bit for bit. All accumulations are therefore written as explicit
Python-level loops over the small kernel/transform axis, vectorized only
across pixels, so the floating-point operation order is pinned.
"""

from __future__ import annotations

import numpy as np

NAME = "python"


def sep_conv(arr: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Separable 2-D convolution, horizontal then vertical, reflect-101 borders."""
    h, w, _ = arr.shape
    k = weights.shape[0]
    r = (k - 1) // 2
    padded = np.pad(arr, ((0, 0), (r, r), (0, 0)), mode="reflect")
    out = np.zeros_like(arr)
    for i in range(k):
        out += weights[i] * padded[:, i:i + w, :]
    padded = np.pad(out, ((r, r), (0, 0), (0, 0)), mode="reflect")
    out2 = np.zeros_like(arr)
    for i in range(k):
        out2 += weights[i] * padded[i:i + h, :, :]
    return out2


def resize_bilinear(arr: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample with half-pixel centers, in lerp form a + t*(b-a)."""
    h, w, c = arr.shape
    sy = (np.arange(out_h, dtype=np.float64) + 0.5) * (h / out_h) - 0.5
    sx = (np.arange(out_w, dtype=np.float64) + 0.5) * (w / out_w) - 0.5
    sy = np.clip(sy, 0.0, float(h - 1))
    sx = np.clip(sx, 0.0, float(w - 1))
    y0 = np.floor(sy).astype(np.intp)
    x0 = np.floor(sx).astype(np.intp)
    fy = (sy - y0)[:, None, None]
    fx = (sx - x0)[None, :, None]
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)

    v00 = arr[y0[:, None], x0[None, :], :]
    v01 = arr[y0[:, None], x1[None, :], :]
    v10 = arr[y1[:, None], x0[None, :], :]
    v11 = arr[y1[:, None], x1[None, :], :]
    top = v00 + fx * (v01 - v00)
    bot = v10 + fx * (v11 - v10)
    return top + fy * (bot - top)


def jpeg_blocks(padded: np.ndarray, qtab: np.ndarray, dct: np.ndarray) -> np.ndarray:
    """Quantization round trip (DCT, quantize, dequantize, IDCT) on 8x8 blocks.

    ``padded`` is a level-shifted plane with both dimensions multiples of 8.
    """
    hh, ww = padded.shape
    nby, nbx = hh // 8, ww // 8
    blocks = padded.reshape(nby, 8, nbx, 8).transpose(0, 2, 1, 3).reshape(-1, 8, 8)

    t1 = np.zeros_like(blocks)
    for x in range(8):
        t1 += dct[None, :, x, None] * blocks[:, None, x, :]
    coef = np.zeros_like(blocks)
    for y in range(8):
        coef += t1[:, :, y, None] * dct[None, None, :, y]

    coef = np.rint(coef / qtab[None, :, :]) * qtab[None, :, :]

    t2 = np.zeros_like(blocks)
    for u in range(8):
        t2 += dct[None, u, :, None] * coef[:, u, None, :]
    out = np.zeros_like(blocks)
    for v in range(8):
        out += t2[:, :, v, None] * dct[None, None, v, :]

    return out.reshape(nby, nbx, 8, 8).transpose(0, 2, 1, 3).reshape(hh, ww)
