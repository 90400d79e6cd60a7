"""Truncated SVD with a deterministic sign convention."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NumericalError, ShapeError

__all__ = ["SvdTriplet", "thin_svd", "truncated_svd", "singular_values", "spectral_norm"]


@dataclass(frozen=True, eq=False)
class SvdTriplet:
    """Leading singular triplets: ``m ≈ u @ diag(s) @ v.T``.

    ``u`` is ``rows x rank`` and ``v`` is ``cols x rank``; columns are the
    singular vectors.
    """

    s: np.ndarray
    u: np.ndarray
    v: np.ndarray

    @property
    def rank(self) -> int:
        return self.s.size

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.s) @ self.v.T


def _checked(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError("expected a 2-d matrix")
    if not np.isfinite(m).all():
        raise NumericalError("matrix has non-finite entries")
    return m


def _canonical_signs(u, v):
    # largest-magnitude entry of each left vector is made nonnegative
    idx = np.argmax(np.abs(u), axis=0)
    flip = np.where(u[idx, np.arange(u.shape[1])] < 0, -1.0, 1.0)
    return u * flip, v * flip


def thin_svd(m):
    """``u, s, vt`` of the economy SVD.

    LAPACK's divide-and-conquer driver occasionally fails to converge on
    perfectly ordinary input; the transpose is then tried, which runs the
    iteration on a different bidiagonal form.
    """
    m = _checked(m)
    try:
        return np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        pass
    try:
        u, s, vt = np.linalg.svd(m.T, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("SVD did not converge") from exc
    return vt.T, s, u.T


def truncated_svd(m, rank: int) -> SvdTriplet:
    """Top-``rank`` singular triplets of ``m`` (Eckart–Young optimal truncation)."""
    m = _checked(m)
    if not 1 <= rank <= min(m.shape):
        raise ValueError(f"rank must be in [1, {min(m.shape)}], got {rank}")
    u, s, vt = thin_svd(m)
    u, v = _canonical_signs(u[:, :rank], vt[:rank].T)
    return SvdTriplet(s[:rank].copy(), np.ascontiguousarray(u), np.ascontiguousarray(v))


def singular_values(m) -> np.ndarray:
    """All singular values, nonincreasing."""
    m = _checked(m)
    try:
        return np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError:
        pass
    try:
        return np.linalg.svd(m.T, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("SVD did not converge") from exc


def spectral_norm(m) -> float:
    return float(singular_values(m)[0])
