"""Deterministic pseudo-randomness.

The generator is splitmix64: a 64-bit additive counter passed through a
fixed xor-shift/multiply finalizer.  It is implemented here in full (rather
than wrapping the stdlib) so that datasets, initializations, and batch
schedules are bit-identical across platforms and Python versions.

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    output = z ^ (z >> 31)

Uniform doubles take the top 53 bits, giving values on [0, 1).
"""

from math import cos, log, pi, sin, sqrt

from .errors import ArgumentError

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_TWO53 = float(1 << 53)


def _mix(z):
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


class Rng:
    """splitmix64 stream; single-owner, advanced on every draw."""

    __slots__ = ("seed", "_state", "_spare_normal")

    def __init__(self, seed: int):
        self.seed = seed & _MASK
        self._state = self.seed
        self._spare_normal = None

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return _mix(self._state)

    def uniform(self, lo: float, hi: float) -> float:
        """Uniform draw on [lo, hi); the state advances on every call."""
        if lo > hi:
            raise ArgumentError(f"uniform bounds reversed: {lo} > {hi}")
        u = (self.next_u64() >> 11) / _TWO53
        return lo + (hi - lo) * u

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        """Gaussian draw by Box-Muller; consumes two uniforms per pair."""
        if self._spare_normal is not None:
            z = self._spare_normal
            self._spare_normal = None
            return mu + sigma * z
        while True:
            u1 = self.uniform(0.0, 1.0)
            if u1 > 0.0:
                break
        u2 = self.uniform(0.0, 1.0)
        radius = sqrt(-2.0 * log(u1))
        self._spare_normal = radius * sin(2.0 * pi * u2)
        return mu + sigma * radius * cos(2.0 * pi * u2)

    def randint(self, n: int) -> int:
        """Integer in [0, n).  Modulo reduction; bias is negligible for the
        small n used here (n << 2**64)."""
        if n <= 0:
            raise ArgumentError("randint needs n >= 1")
        return self.next_u64() % n

    def shuffle(self, seq) -> None:
        """Fisher-Yates shuffle in place."""
        for i in range(len(seq) - 1, 0, -1):
            j = self.randint(i + 1)
            seq[i], seq[j] = seq[j], seq[i]

    def spawn(self, index: int) -> "Rng":
        """Derive an independent child stream from (seed, index).

        child_seed = mix(seed XOR mix((index + 1) * GAMMA)); deterministic,
        so parallel workers draw identical streams regardless of scheduling.
        """
        if index < 0:
            raise ArgumentError("spawn index must be non-negative")
        child = _mix(self.seed ^ _mix(((index + 1) * _GAMMA) & _MASK))
        return Rng(child)
