"""Estimators for hybrid Kronecker models.

* :func:`fit_single_given_config` -- best single term of a fixed configuration.
* :func:`fit_single_select_config` -- the same, with the configuration chosen
  by a penalized log-residual information criterion.
* :func:`backfit` -- alternating least squares when all configurations are known.
* :func:`greedy_fit` -- one selected term at a time on the running residual,
  with an optional random-matrix stopping rule.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .configspace import AmbientShape, Configuration, enumerate_configurations, parameter_count
from .exceptions import NumericalError, ShapeError
from .lowrank import singular_values, thin_svd, truncated_svd
from .matrix import as_matrix, rng_for
from .orthogonalize import gram_schmidt
from .rearrange import rearrange, unvec
from .terms import HKopaModel, KroneckerTerm, evaluate, normalize_term

__all__ = [
    "EXACT_FIT_RTOL",
    "MONOTONE_RTOL",
    "ICSpec",
    "Stopping",
    "FitOptions",
    "FitRecord",
    "FitReport",
    "fit_single_given_config",
    "ic_value",
    "fit_single_select_config",
    "stopping_threshold",
    "backfit",
    "greedy_fit",
]

log = logging.getLogger(__name__)

#: relative Frobenius residual under which a single-term fit counts as exact
EXACT_FIT_RTOL = 1e-12
#: allowed round-over-round increase of the backfitting objective, relative to ``‖y‖²``
MONOTONE_RTOL = 1e-12


@dataclass(frozen=True)
class ICSpec:
    """Penalty coefficient of the information criterion.

    Use the presets :meth:`mse` (q = 0), :meth:`aic` (q = 2) or :meth:`bic`
    (q = ln(P*Q), resolved once the ambient shape is known).
    """

    q: Optional[float] = None
    name: str = "custom"

    def __post_init__(self):
        if self.q is None and self.name != "bic":
            raise ValueError("only the BIC preset may leave q unresolved")
        if self.q is not None and not self.q >= 0:
            raise ValueError(f"penalty must be nonnegative, got {self.q}")

    @classmethod
    def mse(cls):
        return cls(0.0, "mse")

    @classmethod
    def aic(cls):
        return cls(2.0, "aic")

    @classmethod
    def bic(cls):
        return cls(None, "bic")

    @classmethod
    def parse(cls, text: str) -> "ICSpec":
        """Parse ``mse``, ``aic``, ``bic`` or ``q=<value>``."""
        t = text.strip().lower()
        if t in ("mse", "aic", "bic"):
            return getattr(cls, t)()
        if t.startswith("q="):
            return cls(float(t[2:]), "custom")
        raise ValueError(f"unknown information criterion {text!r}")

    def penalty(self, shape: AmbientShape) -> float:
        if self.q is None:
            return math.log(shape.rows * shape.cols)
        return float(self.q)


@dataclass(frozen=True)
class Stopping:
    """Greedy stopping rule: ``none``, ``rmt`` (random-matrix bound) or ``cpv``."""

    kind: str = "none"
    value: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("none", "rmt", "cpv"):
            raise ValueError(f"unknown stopping rule {self.kind!r}")
        if self.kind == "rmt" and not (self.value is not None and 0 < self.value < 1):
            raise ValueError("rmt stopping needs a probability bound in (0, 1)")
        if self.kind == "cpv" and not (self.value is not None and 0 < self.value <= 1):
            raise ValueError("cpv stopping needs a target fraction in (0, 1]")

    @classmethod
    def random_matrix(cls, prob_bound: float = 0.01):
        return cls("rmt", prob_bound)

    @classmethod
    def target_cpv(cls, fraction: float):
        return cls("cpv", fraction)

    @classmethod
    def parse(cls, text: str) -> "Stopping":
        t = text.strip().lower()
        if t == "none":
            return cls()
        kind, sep, val = t.partition(":")
        if not sep:
            raise ValueError(f"stopping rule {text!r} needs a value, e.g. rmt:0.01")
        return cls(kind, float(val))

    def __str__(self):
        return self.kind if self.kind == "none" else f"{self.kind}:{self.value!r}"


@dataclass(frozen=True)
class FitOptions:
    max_terms: int = 20
    ic: ICSpec = field(default_factory=ICSpec.bic)
    stopping: Stopping = field(default_factory=Stopping)
    backfit_tol: float = 1e-10
    backfit_max_rounds: int = 200
    refine: bool = False
    restarts: int = 1
    randomize_order: bool = False
    seed: int = 0
    #: restrict the greedy search to these configurations (default: all)
    configs: Optional[tuple] = None

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be positive")
        if not self.backfit_tol > 0:
            raise ValueError("backfit_tol must be positive")
        if self.backfit_max_rounds < 1 or self.restarts < 1:
            raise ValueError("backfit_max_rounds and restarts must be positive")


@dataclass
class FitRecord:
    k: int
    config: Configuration
    lambda_hat: float
    ic_value: float
    cpv: float
    residual_fro: float
    ic_count: int
    report_count: int
    overall_ic: float = float("nan")
    stopped_by: str = ""


@dataclass
class FitReport:
    """What a fit did.

    ``records`` has one row per greedy term; ``objective`` holds the squared
    residual norm after each backfitting round (index 0 is before any round).
    """

    records: list = field(default_factory=list)
    stopped_by: str = ""
    penalty: float = float("nan")
    objective: list = field(default_factory=list)
    rounds: int = 0
    converged: bool = False
    changes: list = field(default_factory=list)


def _squared_tail(s: np.ndarray) -> float:
    return float(np.sum(np.square(s[1:])))


def fit_single_given_config(y, c: Configuration) -> tuple[KroneckerTerm, float]:
    """Least-squares single Kronecker term of configuration ``c``.

    Returns the normalized term and the squared residual ``‖y‖² − s₁²``
    (evaluated as the sum of the trailing squared singular values, which
    avoids cancellation for near-exact fits).
    """
    y = as_matrix(y)
    if y.shape != (c.ambient.rows, c.ambient.cols):
        raise ShapeError(f"matrix of shape {y.shape} does not match configuration ambient")
    z = rearrange(y, c)
    u, s, vt = thin_svd(z)
    if s[0] == 0:
        raise NumericalError("cannot fit a Kronecker term to an all-zero matrix")
    term = normalize_term(s[0], unvec(u[:, 0], *c.a_shape), unvec(vt[0], *c.b_shape))
    return term, _squared_tail(s)


def ic_value(residual_sq: float, c: Configuration, shape: AmbientShape, ic: ICSpec) -> float:
    """``T ln(residual_sq / T) + q * ic_count`` with ``T = P*Q``."""
    if not residual_sq > 0:
        raise NumericalError("information criterion undefined for a zero residual")
    t = shape.rows * shape.cols
    return t * math.log(residual_sq / t) + ic.penalty(shape) * parameter_count(c).ic_count


def _select_key(ic, c: Configuration):
    return (ic, parameter_count(c).ic_count, c.a_rows, c.a_cols)


def fit_single_select_config(y, shape: AmbientShape | None = None, ic: ICSpec | None = None,
                             candidates: Sequence[Configuration] | None = None):
    """Pick the configuration minimizing the information criterion and fit it.

    Every candidate (default: :func:`enumerate_configurations`) is scored
    from the singular values of its rearrangement.  A candidate whose
    relative residual is below :data:`EXACT_FIT_RTOL` scores ``-inf``.  Ties
    go to fewer parameters, then to the lexicographically smaller ``(p, q)``.

    Returns
    -------
    term : KroneckerTerm
    config : Configuration
    record : FitRecord
        ``k = 1``; c.p.v. and residual are relative to ``y`` itself.
    """
    y = as_matrix(y)
    shape = shape or AmbientShape.of(y)
    ic = ic or ICSpec.bic()
    if (y.shape[0], y.shape[1]) != (shape.rows, shape.cols):
        raise ShapeError("matrix shape disagrees with the ambient shape")
    cands = list(candidates) if candidates is not None else enumerate_configurations(shape)
    if not cands:
        raise ShapeError(f"no non-trivial configuration exists for {shape.rows}x{shape.cols}")
    total = float(np.sum(np.square(y)))
    if total == 0:
        raise NumericalError("cannot fit a Kronecker term to an all-zero matrix")
    exact = (EXACT_FIT_RTOL ** 2) * total

    best = None
    for c in cands:
        rs = _squared_tail(singular_values(rearrange(y, c)))
        score = -math.inf if rs <= exact else ic_value(rs, c, shape, ic)
        key = _select_key(score, c)
        if best is None or key < best[0]:
            best = (key, c)
    (score, *_), c = best
    term, rs = fit_single_given_config(y, c)
    counts = parameter_count(c)
    rec = FitRecord(
        k=1, config=c, lambda_hat=term.lam, ic_value=score,
        cpv=100.0 * (1.0 - rs / total), residual_fro=math.sqrt(rs),
        ic_count=counts.ic_count, report_count=counts.report_count,
    )
    return term, c, rec


def stopping_threshold(sigma_hat: float, c: Configuration, prob_bound: float) -> float:
    """Spectral-norm level of a Gaussian rearrangement with noise ``sigma_hat``.

    ``sigma_hat * (sqrt(p*q) + sqrt(P*Q/(p*q)) + t)`` with
    ``t = sqrt(2 ln(1/prob_bound))``; the spectral norm of the rearranged
    Gaussian matrix exceeds it with probability at most ``prob_bound``.
    """
    if sigma_hat < 0:
        raise ValueError("sigma_hat must be nonnegative")
    if not 0 < prob_bound < 1:
        raise ValueError("prob_bound must lie in (0, 1)")
    pq = c.a_rows * c.a_cols
    t = math.sqrt(2.0 * math.log(1.0 / prob_bound))
    return sigma_hat * (math.sqrt(pq) + math.sqrt(c.ambient.size / pq) + t)


def greedy_fit(y, opts: FitOptions | None = None) -> tuple[HKopaModel, FitReport]:
    """Add IC-selected Kronecker terms to the running residual.

    With ``rmt`` stopping, term ``k`` is rolled back (and ``k-1`` terms kept)
    when its weight does not exceed :func:`stopping_threshold` evaluated at
    the noise level estimated from the post-subtraction residual.  With
    ``cpv`` stopping the loop ends once the target fraction of ``‖y‖²`` is
    explained.  The returned model is not orthogonalized unless
    ``opts.refine`` is set, in which case the selected configurations are
    refit by :func:`backfit`.
    """
    opts = opts or FitOptions()
    y = as_matrix(y)
    shape = AmbientShape.of(y)
    total = float(np.sum(np.square(y)))
    if total == 0:
        raise NumericalError("cannot fit an all-zero matrix")
    q = opts.ic.penalty(shape)
    report = FitReport(penalty=q)
    cands = list(opts.configs) if opts.configs is not None else None

    e = y.copy()
    terms: list[KroneckerTerm] = []
    ic_total = 0
    stopped = "max_terms"
    floor = (EXACT_FIT_RTOL ** 2) * total
    for k in range(1, opts.max_terms + 1):
        if float(np.sum(np.square(e))) <= floor:
            # residual is rounding noise; a further term would have weight 0,
            # which the random-matrix rule always rejects
            stopped = "rmt" if opts.stopping.kind == "rmt" else "exact"
            break
        term, c, rec = fit_single_select_config(e, shape, opts.ic, cands)
        e_next = e - term.matrix()
        rs = float(np.sum(np.square(e_next)))
        rec.k = k
        rec.residual_fro = math.sqrt(rs)
        rec.cpv = 100.0 * (1.0 - rs / total)
        ic_total += rec.ic_count
        rec.overall_ic = (shape.size * math.log(rs / shape.size) + q * ic_total
                          if rs > 0 else -math.inf)

        if opts.stopping.kind == "rmt":
            sigma_hat = math.sqrt(rs / shape.size)
            thr = stopping_threshold(sigma_hat, c, opts.stopping.value)
            if term.lam <= thr:
                log.debug("term %d (%s) rejected: lambda %.6g <= threshold %.6g",
                          k, c, term.lam, thr)
                stopped = "rmt"
                break

        terms.append(term)
        report.records.append(rec)
        e = e_next
        if opts.stopping.kind == "cpv" and rec.cpv >= 100.0 * opts.stopping.value:
            stopped = "cpv"
            break

    report.stopped_by = stopped
    if report.records:
        report.records[-1].stopped_by = stopped
    model = HKopaModel(shape, terms, canonical=False)
    if opts.refine and terms:
        refined, bf = backfit(y, model.configs, opts)
        report.objective, report.rounds, report.converged = bf.objective, bf.rounds, bf.converged
        report.changes = bf.changes
        model = refined
    return model, report


def _groups(configs):
    groups: dict[Configuration, int] = {}
    for c in configs:
        groups[c] = groups.get(c, 0) + 1
    return groups


def _backfit_once(y, groups, opts, order_rng, callback):
    shape = AmbientShape.of(y)
    total = float(np.sum(np.square(y)))
    slots: dict[Configuration, list[KroneckerTerm]] = {c: [] for c in groups}
    objective = [total]
    changes: list[str] = []
    converged = False
    order = list(groups)
    rounds = 0

    def group_sum(c):
        out = np.zeros_like(y)
        for t in slots[c]:
            out += t.matrix()
        return out

    fitted = np.zeros_like(y)
    for rnd in range(1, opts.backfit_max_rounds + 1):
        rounds = rnd
        if order_rng is not None:
            order = [order[i] for i in order_rng.permutation(len(order))]
        for c in order:
            e = y - (fitted - group_sum(c))
            z = rearrange(e, c)
            r = min(groups[c], *z.shape)
            svd = truncated_svd(z, r)
            new = []
            for s, u, v in zip(svd.s, svd.u.T, svd.v.T):
                if s > 0:
                    new.append(normalize_term(s, unvec(u, *c.a_shape), unvec(v, *c.b_shape)))
            fitted = fitted - group_sum(c)
            slots[c] = new
            fitted = fitted + group_sum(c)

        model = HKopaModel(shape, [t for c in groups for t in slots[c]], canonical=False)
        model, log_ = gram_schmidt(model, return_changes=True)
        changes.extend(f"round {rnd}: {m}" for m in log_)
        slots = {c: [t for t in model.terms if t.config == c] for c in groups}
        fitted = evaluate(model)
        obj = float(np.sum(np.square(y - fitted)))
        # rounding in the objective itself is of order eps * ‖y‖²
        if obj > objective[-1] + MONOTONE_RTOL * total:
            log.warning("backfitting objective increased in round %d: %.17g -> %.17g",
                        rnd, objective[-1], obj)
        objective.append(obj)
        if callback is not None:
            callback(rnd, model, obj)
        if objective[-2] - obj < opts.backfit_tol * total:
            converged = True
            break
    return model, objective, rounds, converged, changes


def backfit(y, configs: Sequence[Configuration], opts: FitOptions | None = None,
            callback: Callable | None = None) -> tuple[HKopaModel, FitReport]:
    """Alternating least squares for a model with known configurations.

    Terms start at zero.  In each round every configuration is refit to the
    residual of all other terms via the rearrangement SVD; ``r`` terms that
    share a configuration are updated together from the top ``r`` singular
    triplets.  The model is orthogonalized with :func:`gram_schmidt` at the
    end of every round, which leaves the fit unchanged.

    Iteration stops when a round lowers ``‖y − ŷ‖²`` by less than
    ``opts.backfit_tol * ‖y‖²`` or after ``opts.backfit_max_rounds`` rounds.
    With ``opts.restarts > 1``, extra runs use seeded random orders of the
    configuration updates and the best final objective wins.

    ``callback(round, model, objective)`` is invoked after every round.
    """
    opts = opts or FitOptions()
    y = as_matrix(y)
    shape = AmbientShape.of(y)
    configs = list(configs)
    if not configs:
        raise ValueError("backfit needs at least one configuration")
    for c in configs:
        if c.ambient != shape:
            raise ShapeError(f"configuration {c} belongs to a different ambient shape")
    groups = _groups(configs)
    rng = rng_for(opts.seed)

    best = None
    for restart in range(opts.restarts):
        order_rng = None
        if restart > 0 or opts.randomize_order:
            order_rng = np.random.Generator(np.random.PCG64(rng.integers(2 ** 63)))
        res = _backfit_once(y, groups, opts, order_rng, callback)
        if best is None or res[1][-1] < best[1][-1]:
            best = res
    model, objective, rounds, converged, changes = best
    report = FitReport(objective=objective, rounds=rounds, converged=converged,
                       changes=changes, penalty=opts.ic.penalty(shape))
    return model, report
