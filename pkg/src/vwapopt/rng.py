"""Counter-based random streams.

Every draw is addressed by ``(seed, stream, path)``: the Philox key holds
``(seed, stream)`` and the path index sits in the upper counter word, so
consecutive steps of one path consume consecutive counters. The numbers a
path sees therefore never depend on batch sizes, worker count or the order
in which paths are evaluated.
"""

import numpy as np

STREAMS = {"vol": 1, "price": 2, "schedule": 3}

_MASK64 = (1 << 64) - 1


def _stream_id(stream):
    if isinstance(stream, str):
        return STREAMS[stream]
    return int(stream)


def generator(seed, stream, path=0):
    """numpy ``Generator`` for one ``(seed, stream, path)`` triple."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    bitgen = np.random.Philox(
        key=[int(seed) & _MASK64, _stream_id(stream)],
        counter=[0, 0, int(path) & _MASK64, 0],
    )
    return np.random.Generator(bitgen)


def normals(seed, stream, path, n):
    """``n`` standard normals for step indices ``0..n-1`` of one path."""
    return generator(seed, stream, path).standard_normal(n)


def normal_block(seed, stream, paths, n):
    """Rows of :func:`normals` for each path index in ``paths``."""
    out = np.empty((len(paths), n))
    for row, k in enumerate(paths):
        out[row] = normals(seed, stream, k, n)
    return out
