"""Portable random numbers.

Everything random in this package goes through :class:`PortableRng`, which
only consumes the raw 64-bit output stream of PCG64.  The derived draws
(integers, floats, shuffles) are implemented here rather than through
``numpy.random.Generator`` methods so the byte stream of a synthetic corpus
does not depend on numpy's internal sampling algorithms.
"""

from __future__ import annotations

import zlib
from typing import MutableSequence, Sequence

import numpy as np

GENERATOR_NAME = "pcg64-raw"

_TWO_64 = 1 << 64


class PortableRng:
    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.seed = seed
        self._bits = np.random.PCG64(seed)

    def raw(self) -> int:
        return int(self._bits.random_raw())

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection sampling."""
        if n <= 0:
            raise ValueError(f"upper bound must be positive, got {n}")
        limit = _TWO_64 - (_TWO_64 % n)
        while True:
            x = self.raw()
            if x < limit:
                return x % n

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range ``[lo, hi]``."""
        return lo + self.below(hi - lo + 1)

    def uniform(self) -> float:
        """Uniform float in ``[0, 1)`` with 53 bits of resolution."""
        return (self.raw() >> 11) * (1.0 / (1 << 53))

    def choice_weighted(self, weights: Sequence[float]) -> int:
        total = sum(weights)
        u = self.uniform() * total
        acc = 0.0
        for i, w in enumerate(weights):
            acc += w
            if u < acc:
                return i
        return len(weights) - 1

    def shuffle(self, items: MutableSequence) -> None:
        # Fisher-Yates, highest index first
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def derive_seed(seed: int, *keys: object) -> int:
    """Stable sub-seed from a base seed and a tuple of keys."""
    text = repr((seed,) + tuple(keys)).encode("utf-8")
    return (zlib.crc32(text) << 32) ^ zlib.adler32(text) ^ (seed & 0xFFFFFFFF)
