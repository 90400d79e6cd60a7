"""
Error against the number of parameters
======================================

Fitting ever more terms to a noisy matrix first removes signal and then
starts fitting noise, so the error against the clean matrix is U-shaped.
The random-matrix stopping rule marks a point close to the bottom of the U.
"""

import numpy as np

from hkopa import AmbientShape, FitOptions, HKopaModel, evaluate, normalize_term
from hkopa.baseline import compare

rng = np.random.default_rng(2)
shape = AmbientShape(64, 64)


def unit(m):
    return m / np.linalg.norm(m)


terms = [normalize_term(lam, unit(rng.standard_normal((p, q))), unit(rng.standard_normal((64 // p, 64 // q))))
         for (p, q), lam in [((4, 4), 3.0), ((8, 8), 2.0), ((16, 4), 1.0)]]
clean = evaluate(HKopaModel(shape, terms, canonical=False))
noisy = clean + (0.5 / 64) * rng.standard_normal(clean.shape)

curve = compare(clean, noisy, FitOptions(max_terms=12))

print("method  terms  params   RSE(clean)   RSE(noisy)")
for p in curve.points:
    mark = "  <- stopping rule" if p.stop_marked else ""
    print(f"{p.method:6s}  {p.terms:5d}  {p.params:6d}   {p.rse:.3e}    {p.rse_input:.3e}{mark}")

best = min(curve.method("hkopa"), key=lambda p: p.rse)
print(f"minimum clean error at {best.terms} terms; rule stopped at {curve.stop_point().terms}")
