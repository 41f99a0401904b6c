# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel backend.

Mirrors ``sidaug.kernels.pyref`` operation for operation: every
accumulation runs in the same order with the same IEEE double ops, so
results are bit-identical to the numpy reference (the build disables
floating-point contraction to keep it that way).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor, rint

cnp.import_array()

NAME = "native"


cdef inline Py_ssize_t _reflect101(Py_ssize_t i, Py_ssize_t n) noexcept nogil:
    if i < 0:
        return -i
    if i >= n:
        return 2 * n - 2 - i
    return i


def sep_conv(double[:, :, ::1] arr, double[::1] weights):
    cdef Py_ssize_t h = arr.shape[0]
    cdef Py_ssize_t w = arr.shape[1]
    cdef Py_ssize_t c = arr.shape[2]
    cdef Py_ssize_t k = weights.shape[0]
    cdef Py_ssize_t r = (k - 1) // 2
    tmp_np = np.empty((h, w, c), dtype=np.float64)
    out_np = np.empty((h, w, c), dtype=np.float64)
    cdef double[:, :, ::1] tmp = tmp_np
    cdef double[:, :, ::1] out = out_np
    cdef Py_ssize_t y, x, ch, i
    cdef double acc

    with nogil:
        for y in range(h):
            for x in range(w):
                for ch in range(c):
                    acc = 0.0
                    for i in range(k):
                        acc += weights[i] * arr[y, _reflect101(x + i - r, w), ch]
                    tmp[y, x, ch] = acc
        for y in range(h):
            for x in range(w):
                for ch in range(c):
                    acc = 0.0
                    for i in range(k):
                        acc += weights[i] * tmp[_reflect101(y + i - r, h), x, ch]
                    out[y, x, ch] = acc
    return out_np


def resize_bilinear(double[:, :, ::1] arr, Py_ssize_t out_h, Py_ssize_t out_w):
    cdef Py_ssize_t h = arr.shape[0]
    cdef Py_ssize_t w = arr.shape[1]
    cdef Py_ssize_t c = arr.shape[2]
    out_np = np.empty((out_h, out_w, c), dtype=np.float64)
    cdef double[:, :, ::1] out = out_np
    cdef double scale_y = h / (<double> out_h)
    cdef double scale_x = w / (<double> out_w)
    cdef Py_ssize_t i, j, ch, y0, y1, x0, x1
    cdef double sy, sx, fy, fx, v00, v01, v10, v11, top, bot

    with nogil:
        for i in range(out_h):
            sy = (i + 0.5) * scale_y - 0.5
            if sy < 0.0:
                sy = 0.0
            elif sy > h - 1.0:
                sy = h - 1.0
            y0 = <Py_ssize_t> floor(sy)
            fy = sy - y0
            y1 = y0 + 1
            if y1 > h - 1:
                y1 = h - 1
            for j in range(out_w):
                sx = (j + 0.5) * scale_x - 0.5
                if sx < 0.0:
                    sx = 0.0
                elif sx > w - 1.0:
                    sx = w - 1.0
                x0 = <Py_ssize_t> floor(sx)
                fx = sx - x0
                x1 = x0 + 1
                if x1 > w - 1:
                    x1 = w - 1
                for ch in range(c):
                    v00 = arr[y0, x0, ch]
                    v01 = arr[y0, x1, ch]
                    v10 = arr[y1, x0, ch]
                    v11 = arr[y1, x1, ch]
                    top = v00 + fx * (v01 - v00)
                    bot = v10 + fx * (v11 - v10)
                    out[i, j, ch] = top + fy * (bot - top)
    return out_np


def jpeg_blocks(double[:, ::1] padded, double[:, ::1] qtab, double[:, ::1] dct):
    cdef Py_ssize_t hh = padded.shape[0]
    cdef Py_ssize_t ww = padded.shape[1]
    out_np = np.empty((hh, ww), dtype=np.float64)
    cdef double[:, ::1] out = out_np
    cdef double blk[8][8]
    cdef double t1[8][8]
    cdef double coef[8][8]
    cdef double t2[8][8]
    cdef Py_ssize_t by, bx, u, v, x, y
    cdef double acc

    with nogil:
        for by in range(0, hh, 8):
            for bx in range(0, ww, 8):
                for x in range(8):
                    for y in range(8):
                        blk[x][y] = padded[by + x, bx + y]
                for u in range(8):
                    for y in range(8):
                        acc = 0.0
                        for x in range(8):
                            acc += dct[u, x] * blk[x][y]
                        t1[u][y] = acc
                for u in range(8):
                    for v in range(8):
                        acc = 0.0
                        for y in range(8):
                            acc += t1[u][y] * dct[v, y]
                        coef[u][v] = acc
                for u in range(8):
                    for v in range(8):
                        coef[u][v] = rint(coef[u][v] / qtab[u, v]) * qtab[u, v]
                for x in range(8):
                    for v in range(8):
                        acc = 0.0
                        for u in range(8):
                            acc += dct[u, x] * coef[u][v]
                        t2[x][v] = acc
                for x in range(8):
                    for y in range(8):
                        acc = 0.0
                        for v in range(8):
                            acc += t2[x][v] * dct[v, y]
                        out[by + x, bx + y] = acc
    return out_np
