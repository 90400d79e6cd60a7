"""
A single Kronecker term
=======================

A matrix of the form ``lam * kron(A, B)`` becomes a rank-one matrix after
the rearrangement, so the best single term of a given factor shape is a
leading singular triplet.  When the shape is unknown, every divisor pair is
tried and the information criterion picks one.
"""

import numpy as np

from hkopa import AmbientShape, Configuration, ICSpec, kron, rearrange
from hkopa.kopa_fit import fit_single_given_config, fit_single_select_config
from hkopa.lowrank import singular_values

rng = np.random.default_rng(0)
shape = AmbientShape(32, 32)

# a 4x8 factor and an 8x4 factor give a 32x32 matrix
a = rng.standard_normal((4, 8))
b = rng.standard_normal((8, 4))
y = kron(a, b)

# after rearrangement only one singular value is nonzero
c = Configuration(4, 8, shape)
s = singular_values(rearrange(y, c))
print("leading singular values:", np.round(s[:4], 12))

# the fitted term reproduces y (factors are unit-norm, the scale sits in lam)
term, residual_sq = fit_single_given_config(y, c)
print(f"lambda = {term.lam:.6f}, residual = {residual_sq:.2e}")
print("max |y - fit| =", np.abs(y - term.matrix()).max())

# with a little noise the shape has to be chosen; BIC finds 4x8 again
noisy = y + 0.01 * rng.standard_normal(y.shape)
term, chosen, record = fit_single_select_config(noisy, shape, ICSpec.bic())
print(f"selected {chosen}, IC = {record.ic_value:.1f}, c.p.v. = {record.cpv:.4f}%")

# a wrong shape explains much less of the matrix
for other in (Configuration(8, 4, shape), Configuration(2, 16, shape)):
    _, rs = fit_single_given_config(noisy, other)
    print(f"{other}: explained {100 * (1 - rs / np.sum(noisy ** 2)):.2f}%")
