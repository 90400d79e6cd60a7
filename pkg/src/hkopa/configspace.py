"""Kronecker configurations of an ambient matrix shape.

A configuration ``(p, q)`` fixes the shape of the left factor ``A`` of a
Kronecker product ``A ⊗ B`` that fills a ``P x Q`` matrix; ``B`` is then
``(P/p) x (Q/q)``.  Any divisor pair of ``(P, Q)`` is admissible, so the usual
powers-of-two setting (``p = 2**m``, ``q = 2**n``) is a special case.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .exceptions import ShapeError

__all__ = [
    "AmbientShape",
    "Configuration",
    "ParameterCount",
    "divisors",
    "enumerate_configurations",
    "parameter_count",
    "is_nested",
]


@dataclass(frozen=True, order=True)
class AmbientShape:
    rows: int
    cols: int

    def __post_init__(self):
        if int(self.rows) != self.rows or int(self.cols) != self.cols:
            raise ShapeError(f"shape must be integral, got {self.rows}x{self.cols}")
        if self.rows < 1 or self.cols < 1:
            raise ShapeError(f"shape must be positive, got {self.rows}x{self.cols}")

    @property
    def size(self) -> int:
        return self.rows * self.cols

    @classmethod
    def of(cls, m) -> "AmbientShape":
        """Shape of a 2-d array."""
        r, c = m.shape
        return cls(int(r), int(c))


@dataclass(frozen=True, order=True)
class Configuration:
    """Shape ``(a_rows, a_cols)`` of the ``A`` factor inside ``ambient``."""

    a_rows: int
    a_cols: int
    ambient: AmbientShape

    def __post_init__(self):
        if self.a_rows < 1 or self.a_cols < 1:
            raise ShapeError(f"configuration must be positive, got {self.a_rows}x{self.a_cols}")
        if self.ambient.rows % self.a_rows or self.ambient.cols % self.a_cols:
            raise ShapeError(
                f"configuration {self.a_rows}x{self.a_cols} does not divide "
                f"{self.ambient.rows}x{self.ambient.cols}"
            )

    @classmethod
    def from_factors(cls, a_shape, b_shape) -> "Configuration":
        """Configuration whose ``A`` and ``B`` have the given shapes."""
        (p, q), (r, s) = a_shape, b_shape
        return cls(int(p), int(q), AmbientShape(int(p * r), int(q * s)))

    @property
    def b_rows(self) -> int:
        return self.ambient.rows // self.a_rows

    @property
    def b_cols(self) -> int:
        return self.ambient.cols // self.a_cols

    @property
    def a_shape(self) -> tuple[int, int]:
        return (self.a_rows, self.a_cols)

    @property
    def b_shape(self) -> tuple[int, int]:
        return (self.b_rows, self.b_cols)

    def __str__(self):
        return f"{self.a_rows}x{self.a_cols}"


class ParameterCount(NamedTuple):
    ic_count: int
    report_count: int


def divisors(n: int) -> list[int]:
    """Ascending positive divisors of ``n``."""
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def enumerate_configurations(shape: AmbientShape) -> list[Configuration]:
    """All non-trivial configurations of ``shape``.

    Every divisor pair ``(p, q)`` of ``(P, Q)`` except ``(1, 1)`` and ``(P, Q)``,
    ordered by ascending ``p`` then ascending ``q``.
    """
    out = []
    for p in divisors(shape.rows):
        for q in divisors(shape.cols):
            if (p, q) in ((1, 1), (shape.rows, shape.cols)):
                continue
            out.append(Configuration(p, q, shape))
    return out


def parameter_count(c: Configuration) -> ParameterCount:
    """Free parameters of a single Kronecker term with configuration ``c``.

    ``ic_count`` is ``p*q + (P/p)*(Q/q)``, the penalty weight used by the
    information criterion.  ``report_count`` subtracts one for the
    normalization constraint and is the figure quoted when comparing
    compression budgets.
    """
    n = c.a_rows * c.a_cols + c.b_rows * c.b_cols
    return ParameterCount(n, n - 1)


def is_nested(inner: Configuration, outer: Configuration) -> bool:
    """True when ``inner``'s ``A`` shape divides ``outer``'s on both axes."""
    if inner.ambient != outer.ambient:
        raise ShapeError("configurations live in different ambient shapes")
    return outer.a_rows % inner.a_rows == 0 and outer.a_cols % inner.a_cols == 0
