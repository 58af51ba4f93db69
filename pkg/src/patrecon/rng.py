"""Platform-stable pseudo-random generator for reproducible datasets.

The generator is xoshiro256** seeded through splitmix64, implemented
directly from the published algorithm so that a dataset is a pure
function of its integer seed regardless of library or language:

* splitmix64: state advances by 0x9E3779B97F4A7C15; output is the
  state mixed by two xor-shift-multiply rounds (0xBF58476D1CE4E5B9,
  0x94D049BB133111EB) and a final 31-bit xor-shift.
* xoshiro256**: four 64-bit words initialized from consecutive
  splitmix64 outputs; output is rotl(s1 * 5, 7) * 9.
* uniform doubles take the top 53 bits: (u64 >> 11) * 2**-53.
* integer draws in [0, n) are floor(uniform() * n), clamped to n - 1.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state once; returns (new_state, output)."""
    state = (state + _GOLDEN) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def mix_seed(seed: int, stream: int) -> int:
    """Derive an independent child seed for (seed, stream) pairs.

    Used to give every dataset item its own generator so items can be
    produced in any order or in parallel.
    """
    state = (seed + (stream + 1) * _GOLDEN) & _MASK64
    _, out = splitmix64(state)
    return out


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** with splitmix64 seeding; deterministic across platforms."""

    def __init__(self, seed: int):
        state = seed & _MASK64
        s = []
        for _ in range(4):
            state, out = splitmix64(state)
            s.append(out)
        self._s = s

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def uniform(self) -> float:
        """Double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def uniform_in(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.uniform()

    def randint(self, n: int) -> int:
        """Integer in [0, n)."""
        if n <= 0:
            raise ValueError("randint needs n >= 1")
        k = int(self.uniform() * n)
        return min(k, n - 1)

    def sign(self) -> int:
        return 1 if self.next_u64() & 1 else -1
