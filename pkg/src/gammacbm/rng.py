"""Reproducible random streams built on a counter-based generator.

A stream is identified by ``(seed, stream)``.  Identical identifiers give
identical variate sequences on every run and every platform, and distinct
identifiers give statistically independent streams, so simulation code can
key sub-streams by structural indices (cycle, defect type) instead of
relying on draw order.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> int:
    """One step of the splitmix64 mixing function (public-domain constants)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _fold(stream: int, indices: tuple[int, ...]) -> int:
    """Mix structural indices into a stream id, order-sensitively."""
    acc = stream & _MASK64
    for idx in indices:
        acc = _splitmix64(acc ^ ((idx + 1) & _MASK64))
    return acc


class RngStream:
    """A deterministic random stream keyed by ``(seed, stream)``.

    Wraps a Philox counter-based bit generator: the key is built directly
    from the two identifiers, so no seeding entropy or global state is
    involved.
    """

    def __init__(self, seed: int, stream: int = 0):
        if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
            raise DomainError(f"seed must be an integer, got {seed!r}")
        if not isinstance(stream, (int, np.integer)) or isinstance(stream, bool):
            raise DomainError(f"stream must be an integer, got {stream!r}")
        self.seed = int(seed) & _MASK64
        self.stream = int(stream) & _MASK64
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def substream(self, *indices: int) -> "RngStream":
        """Derive an independent stream keyed by structural indices.

        The derivation is order-sensitive and does not touch this stream's
        state, so ``substream(j, k)`` is the same stream no matter when or
        how often it is requested.
        """
        return RngStream(self.seed, _fold(self.stream, indices))

    def gamma(self, shape, scale, size=None):
        return self._gen.gamma(shape, scale, size=size)

    def poisson(self, lam, size=None):
        return self._gen.poisson(lam, size=size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size=size)

    @property
    def generator(self) -> np.random.Generator:
        """The underlying stateful generator."""
        return self._gen

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream={self.stream})"
