"""Deterministic stream derivation for parallel Monte Carlo.

Every randomized routine derives one generator per (seed, counter...) path
via SeedSequence spawn keys, so results depend only on the seed and the
block/trial index, never on worker scheduling.
"""

from __future__ import annotations

import numpy as np

# Fixed Monte Carlo block size; worker counts redistribute blocks but the
# per-block streams (and therefore all estimates) are unchanged.
BLOCK_SIZE = 65536


def substream(seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream addressed by (seed, *path)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.PCG64(ss))


def block_plan(samples: int, block_size: int = BLOCK_SIZE):
    """Yield (block_index, block_length) pairs covering `samples` draws."""
    samples = int(samples)
    full, rem = divmod(samples, block_size)
    for b in range(full):
        yield b, block_size
    if rem:
        yield full, rem


def l1_ball_point(rng: np.random.Generator, n: int, radius: float = 1.0) -> np.ndarray:
    """Uniform draw from the l1 ball radius*B_1^n (Dirichlet + radial power)."""
    w = rng.dirichlet(np.ones(n))
    signs = rng.integers(0, 2, n) * 2.0 - 1.0
    return radius * rng.random() ** (1.0 / n) * signs * w
