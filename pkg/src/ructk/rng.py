"""Deterministic counter-based random streams.

Every random decision in this package is drawn from a Philox 4x64-10
counter-based generator (numpy's ``Philox`` bit generator, consumed through
``random_raw`` only).  A stream is addressed by ``(seed, domain, index)``;
the Philox key is ``[seed, (domain << 48) | index]``.  Batch construction
derives one stream per training step, which is what makes step construction
embarrassingly parallel and the emitted batch stream independent of worker
count.

The sampling algorithms layered on the raw 64-bit words are fixed here (and
in the README) so that two implementations sharing a seed produce identical
streams:

* ``randbelow(n)``: draw a word, reject if >= ``floor(2^64 / n) * n``,
  otherwise return ``word % n``.  ``n <= 1`` consumes nothing.
* ``sample_indices(m, k)``: partial Fisher-Yates over ``0..m-1`` taking the
  first ``k`` slots, one ``randbelow(m - i)`` per slot.
* ``uniform(lo, hi)``: 53-bit mantissa, ``(word >> 11) / 2^53`` scaled.
"""

from __future__ import annotations

import numpy as np

RNG_ALGORITHM = "philox4x64-10"

# Stream domains; keeps derived streams from ever colliding across purposes.
DOMAIN_BATCH = 1   # per-training-step batch construction
DOMAIN_SYNTH = 2   # synthetic corpus generation

_MASK64 = (1 << 64) - 1
_MASK48 = (1 << 48) - 1
_BLOCK = 1024


class Stream:
    """One keyed Philox stream with the documented sampling primitives."""

    def __init__(self, seed: int, domain: int = 0, index: int = 0):
        self.seed = seed & _MASK64
        self.domain = domain
        self.index = index
        key = np.array(
            [self.seed, ((domain & 0xFFFF) << 48) | (index & _MASK48)],
            dtype=np.uint64,
        )
        self._bitgen = np.random.Philox(key=key)
        self._buf: list[int] = []
        self._pos = 0

    def next_word(self) -> int:
        """Next raw 64-bit Philox output."""
        if self._pos >= len(self._buf):
            self._buf = self._bitgen.random_raw(_BLOCK).tolist()
            self._pos = 0
        word = self._buf[self._pos]
        self._pos += 1
        return word

    def randbelow(self, n: int) -> int:
        """Unbiased uniform integer in [0, n). n <= 1 consumes no words."""
        if n <= 1:
            return 0
        limit = ((1 << 64) // n) * n
        while True:
            word = self.next_word()
            if word < limit:
                return word % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive."""
        return lo + self.randbelow(hi - lo + 1)

    def sample_indices(self, m: int, k: int) -> list[int]:
        """min(k, m) distinct indices from 0..m-1, uniform without replacement.

        Sparse partial Fisher-Yates: O(k) time and memory regardless of m.
        """
        k = min(k, m)
        displaced: dict[int, int] = {}
        out = []
        for i in range(k):
            j = i + self.randbelow(m - i)
            out.append(displaced.get(j, j))
            displaced[j] = displaced.get(i, i)
        return out

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        """Uniform float in [lo, hi)."""
        return lo + (hi - lo) * ((self.next_word() >> 11) / float(1 << 53))

    def normal(self, mean: float = 0.0, sd: float = 1.0) -> float:
        """Gaussian draw via Box-Muller (two words per call)."""
        u1 = ((self.next_word() >> 11) + 1) / float(1 << 53)  # (0, 1]
        u2 = (self.next_word() >> 11) / float(1 << 53)        # [0, 1)
        z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
        return mean + sd * float(z)


def batch_stream(seed: int, step: int) -> Stream:
    """The stream owning all random decisions of one training step."""
    return Stream(seed, DOMAIN_BATCH, step)


def synth_stream(seed: int, index: int = 0) -> Stream:
    return Stream(seed, DOMAIN_SYNTH, index)
