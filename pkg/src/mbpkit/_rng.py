"""Seeded random streams.

All randomness in the package flows through numpy's Philox bit generator,
a counter-based PRNG whose output is fixed by its key on every platform.
Seeds are 64-bit; auxiliary streams move the key into a disjoint 128-bit
range so they can never collide with a plain seed.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for `seed`; `stream` > 0 selects an independent substream."""
    key = (int(seed) & MASK64) + (int(stream) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from a tuple of printable parts (hash-based,
    identical across runs and platforms)."""
    text = "/".join(str(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")
