"""Rearrangement between Kronecker products and outer products.

``vec`` flattens row-major.  With that convention ``rearrange(kron(a, b), c)``
is exactly ``vec(a) @ vec(b).T``: row ``i*q + j`` of the rearranged matrix is
the row-major flattening of block ``(i, j)``, and every entry ``a[i, j] *
b[k, l]`` lands in row ``i*q + j`` and column ``k*(Q/q) + l``.  All functions
here are pure index permutations (reshape/transpose), so they are exact.
"""

from __future__ import annotations

import numpy as np

from .configspace import Configuration
from .exceptions import ShapeError

__all__ = ["vec", "unvec", "rearrange", "unrearrange"]


def vec(m) -> np.ndarray:
    """Row-major flattening to a ``(rows*cols, 1)`` column."""
    m = np.asarray(m, dtype=np.float64)
    return m.reshape(-1, 1).copy()


def unvec(v, rows: int, cols: int) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.size != rows * cols:
        raise ShapeError(f"cannot reshape {v.size} entries into {rows}x{cols}")
    return v.reshape(rows, cols).copy()


def rearrange(y, c: Configuration) -> np.ndarray:
    """Map ``y`` (shape ``c.ambient``) to the ``(p*q) x (P/p * Q/q)`` matrix of block rows."""
    y = np.asarray(y, dtype=np.float64)
    P, Q = c.ambient.rows, c.ambient.cols
    if y.shape != (P, Q):
        raise ShapeError(f"matrix of shape {y.shape} does not match configuration ambient {P}x{Q}")
    p, q, r, s = c.a_rows, c.a_cols, c.b_rows, c.b_cols
    return y.reshape(p, r, q, s).transpose(0, 2, 1, 3).reshape(p * q, r * s).copy()


def unrearrange(z, c: Configuration) -> np.ndarray:
    """Inverse of :func:`rearrange`."""
    z = np.asarray(z, dtype=np.float64)
    p, q, r, s = c.a_rows, c.a_cols, c.b_rows, c.b_cols
    if z.shape != (p * q, r * s):
        raise ShapeError(f"expected shape {(p * q, r * s)} for configuration {c}, got {z.shape}")
    return z.reshape(p, q, r, s).transpose(0, 2, 1, 3).reshape(p * r, q * s).copy()
