"""Seeded random streams and parameter initialisation."""
from __future__ import annotations

import hashlib

import numpy as np


def _key_words(key) -> list[int]:
    digest = hashlib.sha256(str(key).encode("utf-8")).digest()
    return [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]


def make_rng(seed: int, *keys) -> np.random.Generator:
    """Counter-based (Philox) generator derived from ``seed`` and a key path.

    Streams with different key paths are independent, so a component can
    draw its own stream without disturbing anybody else's.
    """
    entropy = [int(seed) & 0xFFFFFFFF, (int(seed) >> 32) & 0xFFFFFFFF]
    for key in keys:
        entropy.extend(_key_words(key))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def fans(shape) -> tuple[int, int]:
    if len(shape) == 1:
        return shape[0], 1
    if len(shape) == 2:
        return shape[0], shape[1]
    receptive = int(np.prod(shape[:-2]))
    return shape[-2] * receptive, shape[-1] * receptive


def xavier_uniform_init(shape, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw on ``[-a, a]`` with ``a = sqrt(6 / (fan_in + fan_out))``."""
    shape = tuple(int(s) for s in shape)
    if not shape or any(s <= 0 for s in shape):
        raise ValueError(f"xavier_uniform_init needs positive dimensions, got {shape}")
    fan_in, fan_out = fans(shape)
    a = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-a, a, size=shape)
