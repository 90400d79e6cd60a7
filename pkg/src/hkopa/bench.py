"""Two-term simulation study for the backfitting estimator.

The ground truth is ``l1 A1⊗B1 + l2 A2⊗B2 + sigma E`` with nested
configurations.  ``alpha`` mixes a tiled copy of ``B2`` into ``B1``:

    B1 = (B~1 + alpha * ones ⊗ B~2) / sqrt(1 + alpha² * n_ones)

so ``alpha = 0`` gives separable terms and large ``alpha`` makes the model
nearly a single term.  The noise level is quoted as ``sigma0 = sqrt(P*Q) * sigma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .configspace import AmbientShape, Configuration, is_nested
from .exceptions import ShapeError
from .kopa_fit import FitOptions, backfit
from .matrix import frobenius_norm, kron, rng_for
from .orthogonalize import gram_schmidt, left_projection_coefficients, projection_coefficients
from .terms import HKopaModel, evaluate, normalize_term

__all__ = [
    "SimulationSpec",
    "ComponentErrors",
    "generate",
    "component_errors",
    "run_cell",
    "run_grid",
    "long_rows",
    "ALPHA_GRID",
    "SIGMA0_GRID",
]

ALPHA_GRID = (0.0, 0.5, 1.0, 1.5, 2.0)
SIGMA0_GRID = (0.0, 0.5, 1.0, 1.5, 2.0)


@dataclass(frozen=True)
class SimulationSpec:
    shape: AmbientShape = AmbientShape(512, 512)
    config1: tuple = (16, 16)
    config2: tuple = (32, 32)
    lambda1: float = 1.0
    lambda2: float = 1.0
    alpha: float = 0.0
    sigma0: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.alpha < 0 or self.sigma0 < 0:
            raise ValueError("alpha and sigma0 must be nonnegative")
        if not is_nested(self.c1, self.c2) or self.c1 == self.c2:
            raise ShapeError(f"config1 {self.c1} must be strictly nested in config2 {self.c2}")

    @classmethod
    def paper(cls, **kw):
        """512 x 512 with configurations 16x16 and 32x32."""
        return cls(**kw)

    @classmethod
    def desk(cls, **kw):
        """128 x 128 with configurations 8x8 and 16x16 (fast enough for CI)."""
        return cls(shape=AmbientShape(128, 128), config1=(8, 8), config2=(16, 16), **kw)

    @property
    def c1(self) -> Configuration:
        return Configuration(*self.config1, self.shape)

    @property
    def c2(self) -> Configuration:
        return Configuration(*self.config2, self.shape)

    @property
    def sigma(self) -> float:
        return self.sigma0 / math.sqrt(self.shape.size)


def _unit(m):
    return m / frobenius_norm(m)


def generate(spec: SimulationSpec) -> tuple[np.ndarray, HKopaModel]:
    """Draw ``(y, truth)``; the noise-free signal is ``evaluate(truth)``.

    Draw order from the seeded generator: ``A~1``, ``A~2``, ``B~1``, ``B~2``,
    then the noise matrix.
    """
    c1, c2 = spec.c1, spec.c2
    rng = rng_for(spec.seed)
    a1 = _unit(rng.standard_normal(c1.a_shape))
    a2 = _unit(rng.standard_normal(c2.a_shape))
    a2 = _unit(a2 - kron(a1, projection_coefficients(a1, a2)))
    b1 = _unit(rng.standard_normal(c1.b_shape))
    b2 = _unit(rng.standard_normal(c2.b_shape))
    # B~2 is the smaller factor; remove tiled copies of it from B~1
    b1 = _unit(b1 - kron(left_projection_coefficients(b2, b1), b2))

    r = (c2.a_rows // c1.a_rows, c2.a_cols // c1.a_cols)
    ones = np.ones(r)
    b1 = (b1 + spec.alpha * kron(ones, b2)) / math.sqrt(1.0 + spec.alpha ** 2 * ones.size)

    truth = HKopaModel(spec.shape, [normalize_term(spec.lambda1, a1, b1),
                                    normalize_term(spec.lambda2, a2, b2)])
    y = evaluate(truth)
    if spec.sigma0 > 0:
        y = y + spec.sigma * rng.standard_normal(y.shape)
    return y, truth


def _signed_distance(est, true) -> float:
    return min(frobenius_norm(est - true), frobenius_norm(est + true))


@dataclass
class ComponentErrors:
    """Per-round estimation errors for one simulation run.

    ``err_y`` is the relative fitting error ``‖y − ŷ‖ / ‖y‖``; matrix errors
    are Frobenius distances minimized over the sign; weight errors are
    absolute differences.
    """

    alpha: float
    sigma0: float
    seed: int
    rows: list = field(default_factory=list)

    METRICS = ("err_y", "err_A1", "err_A2", "err_B1", "err_B2", "err_lambda1", "err_lambda2")

    def series(self, metric: str) -> np.ndarray:
        return np.array([r[metric] for r in self.rows])

    @property
    def rounds(self) -> int:
        return len(self.rows)


def component_errors(y, fitted: HKopaModel, truth: HKopaModel) -> dict:
    """Errors of ``fitted`` against ``truth``, matching terms by configuration."""
    y_hat = evaluate(fitted)
    out = {"err_y": frobenius_norm(y - y_hat) / frobenius_norm(y)}
    for idx, t in enumerate(truth.terms, start=1):
        match = [f for f in fitted.terms if f.config == t.config]
        if match:
            f = match[0]
            out[f"err_A{idx}"] = _signed_distance(f.a, t.a)
            out[f"err_B{idx}"] = _signed_distance(f.b, t.b)
            out[f"err_lambda{idx}"] = abs(f.lam - t.lam)
        else:
            out[f"err_A{idx}"] = frobenius_norm(t.a)
            out[f"err_B{idx}"] = frobenius_norm(t.b)
            out[f"err_lambda{idx}"] = t.lam
    return out


def run_cell(spec: SimulationSpec, opts: FitOptions | None = None):
    """Generate one cell, backfit with the true configurations, record errors per round.

    Returns ``(errors, model, report)``.
    """
    opts = opts or FitOptions()
    y, truth = generate(spec)
    # terms are compared in the identified parameterization
    truth = HKopaModel(truth.ambient, sorted(gram_schmidt(truth).terms,
                                             key=lambda t: (t.config.a_rows, t.config.a_cols)))
    errs = ComponentErrors(spec.alpha, spec.sigma0, spec.seed)

    def record(rnd, model, obj):
        row = {"iter": rnd}
        row.update(component_errors(y, model, truth))
        errs.rows.append(row)

    model, report = backfit(y, [spec.c1, spec.c2], opts, callback=record)
    return errs, model, report


def run_grid(alphas: Iterable[float], sigmas: Iterable[float], template: SimulationSpec,
             opts: FitOptions | None = None, seeds: Sequence[int] | None = None) -> list[ComponentErrors]:
    """Run :func:`run_cell` for every ``(alpha, sigma0, seed)`` combination."""
    seeds = [template.seed] if seeds is None else list(seeds)
    out = []
    for a in alphas:
        for s in sigmas:
            for seed in seeds:
                spec = replace(template, alpha=float(a), sigma0=float(s), seed=int(seed))
                out.append(run_cell(spec, opts)[0])
    return out


def long_rows(table: Iterable[ComponentErrors]):
    """Long-format rows ``(alpha, sigma0, seed, iter, metric, value)``."""
    for cell in table:
        for row in cell.rows:
            for m in ComponentErrors.METRICS:
                yield (cell.alpha, cell.sigma0, cell.seed, row["iter"], m, row[m])
