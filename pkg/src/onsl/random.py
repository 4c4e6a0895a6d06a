"""Counter-based random streams.

Every draw is a pure function of ``(seed, stream, row, column)``, so a batch
can be split across any number of workers and still reproduce the same numbers.
Streams are 64-bit tags; :func:`derive_stream` builds them from readable parts.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import kernels

DEFAULT_CHUNK = 1 << 16
U64_MASK = (1 << 64) - 1


def derive_stream(tag: str, *parts) -> int:
    payload = "/".join([tag, *(str(p) for p in parts)]).encode()
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def normals(seed: int, stream: int, n: int, d: int, start: int = 0) -> np.ndarray:
    """Standard normal rows ``start .. start+n-1`` of the given stream."""
    return kernels.counter_normals(seed & U64_MASK, stream & U64_MASK, start, n, d)


def uniforms(seed: int, stream: int, n: int, d: int, start: int = 0) -> np.ndarray:
    return kernels.counter_uniforms(seed & U64_MASK, stream & U64_MASK, start, n, d)


def chunk_bounds(n: int, chunk: int = DEFAULT_CHUNK) -> list[tuple[int, int]]:
    return [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]


def map_chunks(fn, n: int, workers: int = 1, chunk: int = DEFAULT_CHUNK) -> list:
    """Apply ``fn(lo, hi)`` over row chunks; results come back in row order.

    Chunk boundaries do not depend on ``workers``, and callers reduce the
    ordered results themselves, so output is independent of parallelism.
    """
    bounds = chunk_bounds(n, chunk)
    if workers <= 1 or len(bounds) <= 1:
        return [fn(lo, hi) for lo, hi in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))
