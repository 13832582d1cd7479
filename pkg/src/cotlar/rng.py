"""Per-path random streams.

Path ``i`` under master seed ``s`` draws from a Philox generator keyed by ``s``
whose counter starts at ``(0, 0, i, stream)``. Philox advances the low counter
words, so streams for different paths never overlap in practice and each path
is reproducible on its own, whatever order or batch it is generated in.
"""

from __future__ import annotations

import numpy as np

__all__ = ["master_key", "path_generator", "path_normals", "derive_seed"]


def master_key(seed: int) -> np.ndarray:
    return np.random.SeedSequence(int(seed)).generate_state(2, dtype=np.uint64)


def path_generator(seed: int, path_index: int, stream: int = 0, key: np.ndarray | None = None) -> np.random.Generator:
    if key is None:
        key = master_key(seed)
    counter = np.array([0, 0, int(path_index), int(stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def path_normals(seed: int, start: int, stop: int, steps: int, dim: int, stream: int = 0) -> np.ndarray:
    """Standard normals of shape ``(stop - start, steps, dim)``, one stream per path."""
    key = master_key(seed)
    out = np.empty((stop - start, steps, dim))
    for row, i in enumerate(range(start, stop)):
        out[row] = path_generator(seed, i, stream, key).standard_normal((steps, dim))
    return out


def derive_seed(seed: int, label: str) -> int:
    """Stable 63-bit child seed for a named task, independent of scheduling."""
    words = [ord(c) for c in label]
    state = np.random.SeedSequence([int(seed) & (2**64 - 1), *words]).generate_state(1, dtype=np.uint64)
    return int(state[0] >> np.uint64(1))
