"""Deterministic stream derivation and Gaussian sampling.

Every random draw in the lab comes from a counter-based Philox generator
keyed by a hash of ``(master_seed, *stream_parts)``.  A trial's message,
noise, and ensemble streams are therefore independent of each other and
of worker scheduling: any single trial can be regenerated in isolation.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_key(master_seed: int, *parts: object) -> int:
    """Hash (master_seed, parts) into a 128-bit Philox key."""
    material = repr((int(master_seed),) + tuple(str(p) for p in parts))
    digest = hashlib.blake2b(material.encode(), digest_size=16).digest()
    return int.from_bytes(digest, "little")


def generator(master_seed: int, *parts: object) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=derive_key(master_seed, *parts)))


def gaussian(master_seed: int, *parts: object, size: int, sigma: float = 1.0) -> np.ndarray:
    """Standard-normal draws via Box-Muller on Philox uniforms.

    Box-Muller on explicitly generated uniforms keeps the sample a pure
    function of the derived key, independent of numpy's internal normal
    algorithm.
    """
    gen = generator(master_seed, *parts)
    half = (size + 1) // 2
    # 1 - U maps [0, 1) to (0, 1]; log(0) never occurs.
    u1 = 1.0 - gen.random(half)
    u2 = gen.random(half)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])[:size]
    return sigma * z
