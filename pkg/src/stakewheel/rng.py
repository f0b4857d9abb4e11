"""Deterministic pseudo-random source shared by all samplers.

The generator is splitmix64: a 64-bit counter advanced by a fixed odd
increment and pushed through an avalanching bijection. The n-th output is a
pure function of (seed, n), so the batch kernels can produce the exact same
stream as the scalar methods here and hand the state back when they finish.

Bounded draws use threshold rejection, never a bare modulo, so every value
in [0, bound) is exactly equally likely.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """Finalizing bijection of splitmix64; avalanches all 64 bits."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX_A) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(seed: int, *path: int) -> int:
    """Hash a master seed and an index path into a substream seed.

    The same (seed, path) always gives the same substream. Distinct values
    in any single path position give distinct seeds because mix64 is a
    bijection; collisions across paths of different shapes are possible in
    principle but negligible at 64 bits.
    """
    state = seed & _MASK64
    for component in path:
        state = mix64(state ^ mix64((component + _GOLDEN) & _MASK64))
    return state


class RandomSource:
    """splitmix64 stream with unbiased bounded draws.

    The state is simply the raw draw counter scaled onto the splitmix64
    orbit; ``set_state`` lets a batch kernel that consumed raw words on our
    behalf resynchronize us.
    """

    __slots__ = ("seed", "_state")

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self._state = self.seed

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed:#x}, state={self._state:#x})"

    @property
    def state(self) -> int:
        """Current raw state; advances by one golden step per raw draw."""
        return self._state

    def set_state(self, state: int) -> None:
        """Resume the stream at a state returned by a batch kernel."""
        self._state = state & _MASK64

    def next_u64(self) -> int:
        """Next raw 64-bit word."""
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def next_below(self, bound: int) -> int:
        """Uniform integer in [0, bound), free of modulo bias.

        Raw words below ``2**64 % bound`` are rejected so that the kept
        range is an exact multiple of ``bound``. The rejection probability
        is bound/2**64, i.e. effectively zero for realistic bounds.
        """
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        if bound > _MASK64 + 1:
            raise ValueError(f"bound must fit in 64 bits, got {bound}")
        threshold = ((1 << 64) - bound) % bound
        while True:
            raw = self.next_u64()
            if raw >= threshold:
                return raw % bound

    def derive(self, *path: int) -> "RandomSource":
        """Independent substream for (this source's seed, path).

        Derivation uses the original seed, not the current position, so a
        substream does not depend on how much the parent has drawn.
        """
        return RandomSource(derive_seed(self.seed, *path))
