"""Deterministic random number generation.

The generator is SplitMix64 (Steele, Lea & Flood 2014): 64-bit integer
state advanced by a fixed odd gamma, output produced by an avalanching
mix of the state. Because the state sequence is ``seed + k * gamma``
(mod 2**64), any run of draws can be produced either one at a time or as
a vectorized block over a counter range; both paths are exercised and
must агree bit for bit (see tests).

Float conversions are documented and exact:

* uniform on [0, 1):  ``(u64 >> 11) * 2.0**-53``
* standard normal:    Box-Muller on one pair of uniforms per draw,
  ``sqrt(-2 ln(1-u1)) * cos(2 pi u2)`` (the sine partner is discarded so
  every draw consumes exactly two raw words)
* uniform integer on [0, n): masked rejection sampling (unbiased,
  variable word consumption)

``split(label)`` derives a child generator from the parent's *seed* and
the label only, never from the parent's current position, so labelled
streams are stable regardless of how many draws the parent has made.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ParameterError

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

_TWO_NEG53 = 2.0 ** -53
_TWO_PI = 2.0 * math.pi


def fnv1a64(data: bytes | str) -> int:
    """64-bit FNV-1a hash, used for stable label and name salts."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def mix64(z: int) -> int:
    """SplitMix64 output mix: avalanche a 64-bit word."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_MIX1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def _label_text(label) -> str:
    if isinstance(label, (tuple, list)):
        return "/".join(_label_text(part) for part in label)
    if isinstance(label, (str, int, np.integer)):
        return str(label)
    raise ParameterError(f"rng split labels must be str/int/tuples, got {type(label).__name__}")


class Rng:
    """Single-owner deterministic generator; share across tasks via split()."""

    __slots__ = ("seed", "_state")

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._state = self.seed

    def split(self, label) -> "Rng":
        """Child generator keyed by (parent seed, label).

        The same label always yields the same child, and the child's
        stream is independent of how far the parent has advanced.
        """
        salt = fnv1a64(f"{self.seed:016x}:{_label_text(label)}")
        return Rng(mix64(salt))

    def _next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return mix64(self._state)

    def _next_block(self, n: int) -> np.ndarray:
        counters = np.uint64(self._state) + np.arange(1, n + 1, dtype=np.uint64) * np.uint64(_GAMMA)
        self._state = (self._state + n * _GAMMA) & _MASK64
        return _mix64_array(counters)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        """Uniform draw on [lo, hi); lo == hi returns lo exactly."""
        if lo > hi:
            raise ParameterError(f"uniform bounds reversed: lo={lo} > hi={hi}")
        u = (self._next_u64() >> 11) * _TWO_NEG53
        return lo + u * (hi - lo)

    def uniform_array(self, n: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        if lo > hi:
            raise ParameterError(f"uniform bounds reversed: lo={lo} > hi={hi}")
        u = (self._next_block(n) >> np.uint64(11)).astype(np.float64) * _TWO_NEG53
        return lo + u * (hi - lo)

    def normal(self) -> float:
        return float(self.normal_array(1)[0])

    def normal_array(self, n: int) -> np.ndarray:
        words = self._next_block(2 * n)
        u = (words >> np.uint64(11)).astype(np.float64) * _TWO_NEG53
        r = np.sqrt(-2.0 * np.log(1.0 - u[0::2]))
        return r * np.cos(_TWO_PI * u[1::2])

    def randint(self, n: int) -> int:
        """Uniform integer on [0, n) via masked rejection."""
        if n <= 0:
            raise ParameterError(f"randint needs n >= 1, got {n}")
        mask = (1 << (n - 1).bit_length()) - 1 if n > 1 else 0
        while True:
            r = self._next_u64() & mask
            if r < n:
                return r

    def bernoulli(self, p: float) -> bool:
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"bernoulli p must be in [0,1], got {p}")
        return self.uniform() < p

    def shuffled_indices(self, n: int) -> list[int]:
        """Fisher-Yates permutation of range(n)."""
        idx = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.randint(i + 1)
            idx[i], idx[j] = idx[j], idx[i]
        return idx
