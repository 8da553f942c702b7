"""Deterministic seed derivation for parallel batch generation.

Per-sample seeds come from a splitmix64 hash of (master seed XOR sample
index), so a batch generated by any number of workers is bit-identical
to the sequential run.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def derive_seed(master: int, *tags: int) -> int:
    """Hash a master seed with one or more integer tags (e.g. sample index)."""
    s = master & _MASK
    for t in tags:
        s = splitmix64(s ^ (t & _MASK))
    return s


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & _MASK))
