"""xorshift64* pseudo-random stream.

State is a single nonzero 64-bit word, so it checkpoints and compares
trivially. Two independent instances exist per recording: one owned by the
world (guest-visible `random()`, part of every checkpoint) and one owned by
the recorder's scheduler (never part of world state).
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_MULT = 0x2545F4914F6CDD1D
_SEED_FALLBACK = 0x9E3779B97F4A7C15


class Xorshift64Star:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = (seed & _MASK) or _SEED_FALLBACK

    def next_u64(self) -> int:
        x = self.state
        x ^= x >> 12
        x ^= (x << 25) & _MASK
        x ^= x >> 27
        self.state = x
        return (x * _MULT) & _MASK

    def next_float(self) -> float:
        """Uniform in [0, 1) from the high 53 bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def clone(self) -> Xorshift64Star:
        return Xorshift64Star(self.state)
