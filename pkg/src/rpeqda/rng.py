"""Deterministic seeding utilities.

All randomness in the package flows through two documented primitives:

* ``mix(seed, *words)`` -- a SplitMix64-based folding function that derives
  independent 64-bit subseeds from a master seed and integer coordinates
  (ensemble member index, replicate index, class index, retry counter).
  SplitMix64 is a published, fixed algorithm (Steele, Lea & Flood 2014),
  so derived seeds are reproducible across platforms and languages.

* ``stream(seed)`` -- a numpy Generator backed by the Philox 4x64
  counter-based bit generator keyed directly with the 64-bit seed.
  Philox has a published algorithm and a platform-independent stream,
  which makes (family, d, p, seed) a complete, portable description of a
  generated random matrix.

Because subseeds are derived by pure arithmetic rather than by drawing
from a shared stream, results never depend on the order in which members,
replicates or folds are processed.
"""

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _finalize(x: int) -> int:
    # SplitMix64 output function.
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def mix(seed: int, *words: int) -> int:
    """Derive a 64-bit subseed from ``seed`` and integer coordinates.

    The folding rule is fixed: start from ``finalize(seed + GOLDEN)`` and
    for each word apply ``finalize((state ^ word) + GOLDEN)``, where
    ``finalize`` is the SplitMix64 output permutation and GOLDEN is
    0x9E3779B97F4A7C15.  Negative inputs are reduced modulo 2**64.
    """
    state = _finalize((seed + _GOLDEN) & _MASK64)
    for w in words:
        state = _finalize(((state ^ (w & _MASK64)) + _GOLDEN) & _MASK64)
    return state


def stream(seed: int) -> np.random.Generator:
    """Return a Philox-backed Generator keyed with the 64-bit ``seed``."""
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))


# Domain-separation tags used when deriving subseeds, chosen once and fixed.
PROJECTION_TAG = 0x5250   # ascii "RP": projection master seeds
STRUCTURE_TAG = 0x5354    # ascii "ST": scheme structural randomness
DRAW_TAG = 0x445A         # ascii "DZ": test-point draws in theory checks
