"""The hybrid Kronecker model: a weighted sum of Kronecker products whose
factor shapes may differ from term to term."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .configspace import AmbientShape, Configuration
from .exceptions import NumericalError, ShapeError
from .matrix import frobenius_norm, kron

__all__ = ["KroneckerTerm", "HKopaModel", "normalize_term", "evaluate", "residual"]


@dataclass(frozen=True, eq=False)
class KroneckerTerm:
    """``lam * kron(a, b)`` with unit-norm ``a`` and ``b`` and ``lam > 0``."""

    lam: float
    a: np.ndarray
    b: np.ndarray
    config: Configuration

    def __post_init__(self):
        if self.a.shape != self.config.a_shape or self.b.shape != self.config.b_shape:
            raise ShapeError(
                f"factor shapes {self.a.shape}, {self.b.shape} do not match configuration "
                f"{self.config} of {self.config.ambient.rows}x{self.config.ambient.cols}"
            )

    def matrix(self) -> np.ndarray:
        return self.lam * kron(self.a, self.b)


@dataclass(frozen=True, eq=False)
class HKopaModel:
    """Ordered list of Kronecker terms sharing one ambient shape.

    ``canonical`` is False for models whose terms have not been passed
    through :func:`hkopa.orthogonalize.gram_schmidt` (greedy output), i.e.
    the orthogonality identifiability condition is not guaranteed.
    """

    ambient: AmbientShape
    terms: tuple = field(default_factory=tuple)
    canonical: bool = True

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            if t.config.ambient != self.ambient:
                raise ShapeError("term ambient shape differs from model ambient shape")

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    @property
    def configs(self) -> list[Configuration]:
        return [t.config for t in self.terms]

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([t.lam for t in self.terms], dtype=np.float64)

    def with_terms(self, terms, canonical=None) -> "HKopaModel":
        return replace(self, terms=tuple(terms),
                       canonical=self.canonical if canonical is None else canonical)

    def sorted(self) -> "HKopaModel":
        """Terms reordered by nonincreasing ``lam`` (stable)."""
        order = sorted(range(len(self.terms)), key=lambda i: -self.terms[i].lam)
        return self.with_terms([self.terms[i] for i in order])


def _sign_of_largest(a: np.ndarray) -> float:
    flat = a.ravel()
    return -1.0 if flat[np.argmax(np.abs(flat))] < 0 else 1.0


def normalize_term(lam: float, a, b) -> KroneckerTerm:
    """Rescale ``lam * kron(a, b)`` into canonical form without changing its value.

    The norms of ``a`` and ``b`` are pulled into the weight, ``a`` is flipped
    so its largest-magnitude entry is nonnegative, and ``b`` absorbs whatever
    sign keeps the weight positive.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na, nb = frobenius_norm(a), frobenius_norm(b)
    if na == 0 or nb == 0 or lam == 0 or not np.isfinite(lam):
        raise NumericalError("cannot normalize a zero (or non-finite) Kronecker term")
    a = a / na
    b = b / nb
    lam = float(lam) * na * nb
    sa = _sign_of_largest(a)
    if sa < 0:
        a = -a
        lam = -lam
    if lam < 0:
        b = -b
        lam = -lam
    return KroneckerTerm(lam, a, b, Configuration.from_factors(a.shape, b.shape))


def evaluate(model: HKopaModel) -> np.ndarray:
    out = np.zeros((model.ambient.rows, model.ambient.cols))
    for t in model.terms:
        out += t.matrix()
    return out


def residual(y, model: HKopaModel) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (model.ambient.rows, model.ambient.cols):
        raise ShapeError(f"matrix of shape {y.shape} does not match model ambient shape")
    return y - evaluate(model)
