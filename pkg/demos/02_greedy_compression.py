"""
Greedy compression of a structured matrix
=========================================

The greedy estimator adds one term at a time to the running residual, each
with its own factor shape.  On a matrix that is a sum of a few Kronecker
products of different shapes it needs far fewer parameters than a truncated
SVD for the same accuracy.
"""

import numpy as np

from hkopa import AmbientShape, FitOptions, HKopaModel, Stopping, evaluate, greedy_fit, normalize_term
from hkopa.baseline import rse, svd_approximation

rng = np.random.default_rng(1)
shape = AmbientShape(128, 128)

# three terms with shapes 4x4, 16x16 and 32x8
truth = HKopaModel(shape, [
    normalize_term(3.0, rng.standard_normal((4, 4)), rng.standard_normal((32, 32))),
    normalize_term(2.0, rng.standard_normal((16, 16)), rng.standard_normal((8, 8))),
    normalize_term(1.0, rng.standard_normal((32, 8)), rng.standard_normal((4, 16))),
], canonical=False)
y = evaluate(truth) + 0.002 * rng.standard_normal((128, 128))

# stop with the random-matrix rule at tail probability 0.01
model, report = greedy_fit(y, FitOptions(max_terms=20, stopping=Stopping.random_matrix(0.01)))

print(" k  config   lambda     c.p.v.   params")
params = 0
for r in report.records:
    params += r.report_count
    print(f"{r.k:2d}  {str(r.config):7s} {r.lambda_hat:8.4f}  {r.cpv:8.4f}%  {params:6d}")
print("stopped by:", report.stopped_by)
# Terms after the third are small corrections: each early term was fitted
# while the others were still in the residual, so it carries a little of
# them.  FitOptions(refine=True) refits the selected shapes jointly instead.

fit = evaluate(model)
print(f"hybrid fit: RSE {rse(y, fit):.2e} with {params} parameters")

# the SVD with the closest budget that does not exceed ours
k = max(1, params // (128 + 128 - 1))
approx, svd_params = svd_approximation(y, k)
print(f"rank-{k} SVD: RSE {rse(y, approx):.2e} with {svd_params} parameters")
