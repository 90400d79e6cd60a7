"""Identifiability of hybrid Kronecker models.

Two terms whose ``A`` shapes are nested can trade mass: for ``A1`` smaller
than ``A2`` and any ``C`` of the quotient shape,

    l1 A1⊗(B1 + l2 C⊗B2) + l2 (A2 − l1 A1⊗C)⊗B2 = l1 A1⊗B1 + l2 A2⊗B2.

The canonical representative requires every ``A`` to be orthogonal to all
shifted copies ``A_small ⊗ E_ij`` of the smaller ``A``'s, and terms sharing a
configuration to have orthogonal ``A``'s and ``B``'s.  :func:`gram_schmidt`
rewrites any model into that form without changing the matrix it represents.
"""

from __future__ import annotations

import logging
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .configspace import Configuration, is_nested
from .exceptions import ShapeError
from .lowrank import truncated_svd
from .matrix import kron, trace_product
from .rearrange import unvec, vec
from .terms import HKopaModel, KroneckerTerm, normalize_term

__all__ = [
    "ORTHOGONALITY_TOL",
    "DEGENERATE_TOL",
    "projection_coefficients",
    "left_projection_coefficients",
    "Violation",
    "check_assumption2",
    "gram_schmidt",
]

log = logging.getLogger(__name__)

ORTHOGONALITY_TOL = 1e-8
DEGENERATE_TOL = 1e-12


def _quotient(small_shape, large_shape):
    (p1, q1), (p2, q2) = small_shape, large_shape
    if p2 % p1 or q2 % q1:
        raise ShapeError(f"{p1}x{q1} does not divide {p2}x{q2}")
    return p2 // p1, q2 // q1


def projection_coefficients(a_small, a_large) -> np.ndarray:
    """Least-squares ``C`` for ``a_large ≈ kron(a_small, C)``.

    Entry ``(i, j)`` is ``tr[a_large (a_small ⊗ E_ij)ᵀ] / ‖a_small‖²`` where
    ``E_ij`` is the indicator of position ``(i, j)``.  The shifted copies
    ``a_small ⊗ E_ij`` have disjoint supports, which is why the problem
    decouples entrywise.
    """
    a_small = np.asarray(a_small, dtype=np.float64)
    a_large = np.asarray(a_large, dtype=np.float64)
    r, s = _quotient(a_small.shape, a_large.shape)
    p, q = a_small.shape
    blocks = a_large.reshape(p, r, q, s)
    return np.einsum("ab,aibj->ij", a_small, blocks) / trace_product(a_small, a_small)


def left_projection_coefficients(b_small, b_large) -> np.ndarray:
    """Least-squares ``C`` for ``b_large ≈ kron(C, b_small)``."""
    b_small = np.asarray(b_small, dtype=np.float64)
    b_large = np.asarray(b_large, dtype=np.float64)
    r, s = _quotient(b_small.shape, b_large.shape)
    p, q = b_small.shape
    blocks = b_large.reshape(r, p, s, q)
    return np.einsum("pq,ipjq->ij", b_small, blocks) / trace_product(b_small, b_small)


class Violation(NamedTuple):
    first: int
    second: int
    kind: str
    value: float


def check_assumption2(model: HKopaModel, tol: float = ORTHOGONALITY_TOL) -> list[Violation]:
    """Pairs of terms breaking the orthogonality identifiability condition.

    For a strictly nested pair the largest projection coefficient of the
    bigger ``A`` onto shifted copies of the smaller is compared with ``tol``;
    for an equal-configuration pair both ``tr(A_l A_kᵀ)`` and ``tr(B_l B_kᵀ)``
    are.  Indices refer to ``model.terms``.
    """
    out = []
    terms = model.terms
    for k, l in combinations(range(len(terms)), 2):
        tk, tl = terms[k], terms[l]
        if tk.config == tl.config:
            va = abs(trace_product(tk.a, tl.a))
            vb = abs(trace_product(tk.b, tl.b))
            if va > tol:
                out.append(Violation(k, l, "equal-A", va))
            if vb > tol:
                out.append(Violation(k, l, "equal-B", vb))
            continue
        if is_nested(tk.config, tl.config):
            small, large = k, l
        elif is_nested(tl.config, tk.config):
            small, large = l, k
        else:
            continue
        v = float(np.max(np.abs(projection_coefficients(terms[small].a, terms[large].a))))
        if v > tol:
            out.append(Violation(small, large, "nested", v))
    return out


def _shift_design(a_small, large_shape) -> np.ndarray:
    # columns are vec(a_small ⊗ E_ij), (i, j) row-major over the quotient shape
    r, s = _quotient(a_small.shape, large_shape)
    z = np.einsum("ab,ik,jl->aibjkl", a_small, np.eye(r), np.eye(s))
    return z.reshape(large_shape[0] * large_shape[1], r * s)


def _joint_projection(a, preds) -> list[np.ndarray]:
    """Coefficients ``C_k`` minimizing ``‖a − Σ_k preds[k] ⊗ C_k‖_F``.

    ``preds`` holds unit-norm ``(config, A)`` pairs.  When all pairs of
    predecessors are comparable their shifted copies are mutually orthogonal
    (each was residualized against the smaller ones), so the joint problem
    splits into independent projections.  Otherwise a dense least-squares
    solve over all shifted copies is used.
    """
    comparable = all(
        is_nested(c1, c2) or is_nested(c2, c1)
        for (c1, _), (c2, _) in combinations(preds, 2)
    )
    if comparable:
        return [projection_coefficients(ak, a) for _, ak in preds]
    designs = [_shift_design(ak, a.shape) for _, ak in preds]
    x = np.hstack(designs)
    coef, *_ = np.linalg.lstsq(x, a.reshape(-1), rcond=None)
    out, start = [], 0
    for (_, ak), d in zip(preds, designs):
        r, s = _quotient(ak.shape, a.shape)
        out.append(coef[start:start + d.shape[1]].reshape(r, s))
        start += d.shape[1]
    return out


def _merge_group(config: Configuration, members, cut):
    """Re-extract a same-configuration group by SVD of its rearranged sum.

    ``members`` are ``[A, W]`` pairs whose term value is ``A ⊗ W``.  Returns
    new ``[A, W]`` pairs with orthonormal ``A``'s and orthogonal ``W``'s,
    dropping singular values at or below ``cut``.
    """
    z = sum(vec(a) @ vec(w).T for a, w in members)
    svd = truncated_svd(z, min(len(members), *z.shape))
    out = []
    for s, u, v in zip(svd.s, svd.u.T, svd.v.T):
        if s <= cut:
            continue
        out.append([unvec(u, *config.a_shape), s * unvec(v, *config.b_shape)])
    return out


def gram_schmidt(model: HKopaModel, degenerate_tol: float = DEGENERATE_TOL,
                 return_changes: bool = False):
    """Rewrite ``model`` so that it satisfies both identifiability conditions.

    Terms are processed by ascending ``A`` shape.  Each term's ``A`` is
    projected off the span of shifted copies of all strictly nested, already
    processed ``A``'s; the removed part is pushed into those terms' ``B``
    factors so the represented matrix is unchanged.  Terms sharing a
    configuration are merged and re-extracted by SVD, which makes their
    ``A``'s and ``B``'s orthogonal.  Terms whose contribution falls to
    ``degenerate_tol`` times the largest weight are dropped.

    Parameters
    ----------
    model : HKopaModel
    degenerate_tol : float
        Relative size below which a residualized term is considered absorbed.
    return_changes : bool
        If True, also return a list of human-readable change-log entries.

    Returns
    -------
    HKopaModel or (HKopaModel, list of str)
        Canonical model with terms sorted by nonincreasing weight.
    """
    changes: list[str] = []
    if not model.terms:
        out = model.with_terms([], canonical=True)
        return (out, changes) if return_changes else out

    cut = degenerate_tol * max(t.lam for t in model.terms)
    groups: dict[Configuration, list] = {}
    for t in sorted(model.terms, key=lambda t: (t.config.a_rows, t.config.a_cols)):
        # a term is carried as [A, W] with W = lam * B so absorption is additive
        groups.setdefault(t.config, []).append([t.a.copy(), t.lam * t.b])

    done: list[tuple[Configuration, list]] = []
    for cfg, members in groups.items():
        preds = [(c, m) for c, m in done if is_nested(c, cfg)]
        flat = [(c, mem) for c, ms in preds for mem in ms]
        for mem in members:
            if not flat:
                break
            a, w = mem
            coeffs = _joint_projection(a, [(c, pm[0]) for c, pm in flat])
            for (_, pm), cm in zip(flat, coeffs):
                a = a - kron(pm[0], cm)
                pm[1] = pm[1] + kron(cm, w)
            mem[0] = a
        n_before = len(members)
        merged = _merge_group(cfg, members, cut)
        if len(merged) < n_before:
            changes.append(f"configuration {cfg}: {n_before - len(merged)} term(s) absorbed "
                           f"into nested predecessors or merged")
        done.append((cfg, merged))

    terms: list[KroneckerTerm] = []
    for cfg, members in done:
        if not members:
            continue
        n_before = len(members)
        final = _merge_group(cfg, members, cut)
        if len(final) < n_before:
            changes.append(f"configuration {cfg}: {n_before - len(final)} term(s) vanished "
                           f"after absorbing larger terms")
        terms.extend(normalize_term(1.0, a, w) for a, w in final)

    for msg in changes:
        log.debug(msg)
    out = model.with_terms(terms, canonical=True).sorted()
    return (out, changes) if return_changes else out
