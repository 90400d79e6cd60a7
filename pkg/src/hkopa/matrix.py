"""Dense matrix primitives.

Matrices are plain 2-d ``numpy.float64`` arrays in C (row-major) order.
Random draws use numpy's ``Generator`` backed by PCG64 seeded with the user
seed, and standard normals come from ``Generator.standard_normal`` (numpy's
ziggurat transform).  For a fixed numpy release this is bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NumericalError, ShapeError

__all__ = [
    "NoiseSpec",
    "as_matrix",
    "kron",
    "frobenius_norm",
    "trace_product",
    "block",
    "rng_for",
    "add_noise",
]

_MAX_ENTRIES = np.iinfo(np.intp).max // 8


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float
    seed: int = 0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if self.seed < 0:
            raise ValueError("seed must be an unsigned integer")


def as_matrix(m, *, finite: bool = True) -> np.ndarray:
    """Coerce to a contiguous 2-d float64 array, optionally rejecting NaN/Inf."""
    a = np.ascontiguousarray(m, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-d matrix, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ShapeError(f"matrix must be non-empty, got shape {a.shape}")
    if finite and not np.isfinite(a).all():
        raise NumericalError("matrix has non-finite entries")
    return a


def kron(a, b) -> np.ndarray:
    """Kronecker product; block ``(i, j)`` of the result is ``a[i, j] * b``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError("kron expects 2-d matrices")
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows and cols > _MAX_ENTRIES // rows:
        raise OverflowError(f"Kronecker product of size {rows}x{cols} is too large")
    out = a[:, None, :, None] * b[None, :, None, :]
    return out.reshape(rows, cols)


def frobenius_norm(m) -> float:
    return float(np.sqrt(np.sum(np.square(m, dtype=np.float64))))


def trace_product(a, b) -> float:
    """``tr(a bᵀ)``, i.e. the entrywise inner product."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.dot(a.ravel(), b.ravel()))


def block(m, i: int, j: int, height: int, width: int) -> np.ndarray:
    """The ``(i, j)``-th ``height x width`` block of ``m`` (0-based)."""
    if m.shape[0] % height or m.shape[1] % width:
        raise ShapeError(f"{height}x{width} blocks do not tile {m.shape}")
    return m[i * height:(i + 1) * height, j * width:(j + 1) * width]


def rng_for(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def add_noise(m, spec: NoiseSpec) -> np.ndarray:
    """``m + sigma * G`` with ``G`` i.i.d. standard Gaussian drawn from ``spec.seed``."""
    m = as_matrix(m)
    if spec.sigma == 0:
        return m.copy()
    g = rng_for(spec.seed).standard_normal(m.shape)
    return m + spec.sigma * g
