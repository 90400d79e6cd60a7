"""
One matrix, many representations
================================

When one term's ``A`` factor is nested in another's, part of the larger
term can be moved into the smaller one without changing the matrix.  The
Gram-Schmidt step picks the representation in which nested ``A`` factors
are orthogonal, which makes the decomposition unique up to signs.
"""

import numpy as np

from hkopa import AmbientShape, HKopaModel, check_assumption2, evaluate, gram_schmidt, kron, normalize_term

rng = np.random.default_rng(3)
shape = AmbientShape(16, 16)

a1 = rng.standard_normal((2, 2))
b1 = rng.standard_normal((8, 8))
c = rng.standard_normal((2, 2))
# the 4x4 factor deliberately contains a copy of the 2x2 one
a2 = kron(a1, c) + 0.3 * rng.standard_normal((4, 4))
b2 = rng.standard_normal((4, 4))

model = HKopaModel(shape, [normalize_term(1.0, a1, b1), normalize_term(1.0, a2, b2)], canonical=False)
print("violations before:", [(v.first, v.second, v.kind) for v in check_assumption2(model)])

clean = gram_schmidt(model)
print("violations after: ", check_assumption2(clean))
print("matrix unchanged: ", np.allclose(evaluate(model), evaluate(clean), atol=1e-12))
for t in clean.terms:
    print(f"  {t.config}: lambda = {t.lam:.4f}")
