"""Shared domain types: Hurst parameter, dyadic time grid, seed records."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One round of the splitmix64 mixer (public-domain constants)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class HurstParameter:
    """Hurst index H of the driving noise, restricted to (0, 1)."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not (0.0 < v < 1.0) or not np.isfinite(v):
            raise DomainError(f"Hurst parameter must lie in (0, 1), got {self.value}")
        object.__setattr__(self, "value", v)

    @property
    def young_regime(self) -> bool:
        """True iff H > 1/2, where pathwise Young calculus applies."""
        return self.value > 0.5

    @property
    def is_brownian(self) -> bool:
        return self.value == 0.5


@dataclass(frozen=True)
class DyadicGrid:
    """Uniform partition of [0, T] into 2**n2 steps."""

    n2: int
    horizon: float = 1.0

    def __post_init__(self):
        if int(self.n2) != self.n2 or self.n2 < 1:
            raise DomainError(f"dyadic order n2 must be a positive integer, got {self.n2}")
        if not (self.horizon > 0.0 and np.isfinite(self.horizon)):
            raise DomainError(f"horizon must be positive and finite, got {self.horizon}")
        object.__setattr__(self, "n2", int(self.n2))
        object.__setattr__(self, "horizon", float(self.horizon))

    @property
    def n1(self) -> int:
        return 1 << self.n2

    @property
    def step(self) -> float:
        return self.horizon / self.n1

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n1 + 1)


@dataclass(frozen=True)
class SeedRecord:
    """Master seed plus a substream index.

    The generator state is the pure function
    ``splitmix64(master XOR splitmix64(stream))`` fed to PCG64, so substreams
    are reproducible regardless of how work is scheduled across chunks.
    """

    master: int
    stream: int = 0

    def __post_init__(self):
        if not (0 <= int(self.master) <= _MASK64):
            raise DomainError("master seed must fit in 64 bits")
        if int(self.stream) < 0:
            raise DomainError("stream index must be non-negative")
        object.__setattr__(self, "master", int(self.master))
        object.__setattr__(self, "stream", int(self.stream))

    def state(self) -> int:
        return splitmix64(self.master ^ splitmix64(self.stream))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.state()))

    def substream(self, offset: int) -> "SeedRecord":
        return SeedRecord(self.master, self.stream + offset)

    def to_dict(self) -> dict:
        return {"master": self.master, "stream": self.stream}
