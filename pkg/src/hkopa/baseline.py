"""Truncated-SVD baseline and error-vs-parameters comparison curves."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .configspace import AmbientShape
from .exceptions import NumericalError, ShapeError
from .kopa_fit import FitOptions, Stopping, greedy_fit, stopping_threshold
from .lowrank import truncated_svd
from .matrix import as_matrix

__all__ = ["CurvePoint", "ComparisonCurve", "svd_approximation", "rse", "compare"]


def svd_approximation(y, k: int) -> tuple[np.ndarray, int]:
    """Rank-``k`` truncation of ``y`` and its parameter count ``k*(P + Q - 1)``."""
    y = as_matrix(y)
    svd = truncated_svd(y, k)
    return svd.reconstruct(), k * (y.shape[0] + y.shape[1] - 1)


def rse(truth, fitted) -> float:
    """Relative squared error ``‖truth − fitted‖² / ‖truth‖²``."""
    truth = np.asarray(truth, dtype=np.float64)
    fitted = np.asarray(fitted, dtype=np.float64)
    if truth.shape != fitted.shape:
        raise ShapeError(f"shape mismatch: {truth.shape} vs {fitted.shape}")
    denom = float(np.sum(np.square(truth)))
    if denom == 0:
        raise NumericalError("relative error undefined for a zero reference matrix")
    return float(np.sum(np.square(truth - fitted))) / denom


@dataclass
class CurvePoint:
    method: str
    terms: int
    params: int
    rse: float
    rse_input: float
    stop_marked: bool = False


@dataclass
class ComparisonCurve:
    points: list = field(default_factory=list)

    def method(self, name: str) -> list[CurvePoint]:
        return [p for p in self.points if p.method == name]

    def stop_point(self):
        marked = [p for p in self.points if p.stop_marked]
        return marked[0] if marked else None


def compare(y_clean, y_noisy, opts: FitOptions | None = None, max_rank: int | None = None,
            prob_bound: float = 0.01) -> ComparisonCurve:
    """Error-vs-parameter curves of greedy hybrid fits and truncated SVD.

    The greedy fit runs on ``y_noisy`` for ``opts.max_terms`` terms without a
    stopping rule; the point where the random-matrix rule with
    ``prob_bound`` would have stopped is flagged ``stop_marked``.  ``rse`` is
    against ``y_clean``; ``rse_input`` against ``y_noisy``.  Parameters are
    cumulative report counts for the hybrid fit and ``k*(P + Q - 1)`` for
    SVD.  ``max_rank`` defaults to the smallest rank whose SVD budget covers
    the hybrid fit's final budget.
    """
    y_clean = as_matrix(y_clean)
    y_noisy = as_matrix(y_noisy)
    if y_clean.shape != y_noisy.shape:
        raise ShapeError("clean and noisy matrices differ in shape")
    opts = replace(opts or FitOptions(), stopping=Stopping(), refine=False)
    shape = AmbientShape.of(y_noisy)
    model, report = greedy_fit(y_noisy, opts)

    curve = ComparisonCurve()
    fitted = np.zeros_like(y_noisy)
    params = 0
    k_hat = None
    for term, rec in zip(model.terms, report.records):
        sigma_hat = rec.residual_fro / math.sqrt(shape.size)
        if k_hat is None and term.lam <= stopping_threshold(sigma_hat, rec.config, prob_bound):
            k_hat = rec.k - 1
        fitted += term.matrix()
        params += rec.report_count
        curve.points.append(CurvePoint("hkopa", rec.k, params,
                                       rse(y_clean, fitted), rse(y_noisy, fitted)))
    if k_hat is None:
        k_hat = len(model.terms)
    for p in curve.points:
        p.stop_marked = p.terms == k_hat

    full = min(shape.rows, shape.cols)
    if max_rank is None:
        per = shape.rows + shape.cols - 1
        max_rank = min(full, max(1, -(-params // per)))
    max_rank = min(max_rank, full)
    svd = truncated_svd(y_noisy, max_rank)
    fitted = np.zeros_like(y_noisy)
    for k in range(1, max_rank + 1):
        fitted += svd.s[k - 1] * np.outer(svd.u[:, k - 1], svd.v[:, k - 1])
        curve.points.append(CurvePoint("svd", k, k * (shape.rows + shape.cols - 1),
                                       rse(y_clean, fitted), rse(y_noisy, fitted)))
    return curve
