"""Residue-sum kernels and rates against brute-force numerics.

The response kernels are inverse Laplace transforms; the package sums
residues at the zeros of H, while the oracle integrates along a vertical
contour.  The finite-time rate is checked against a direct double time
integral differentiated numerically.
"""
from stochrad import (ExponentialOU, bromwich_numeric, eval_F, eval_G, natural_params,
                      rate_finite_time, rate_quadrature, solve_roots)

for kappa in (1e-8, 1e-3, 0.5):
    p = natural_params(kappa=kappa)
    r = solve_roots(p)
    for t in (0.5, 10.0):
        f0 = eval_F(0, t, r, p)
        g1 = eval_G(1, "+", 0.3, t, r, p)
        ref_f = bromwich_numeric("F0", {}, t, p, exclude_runaway=True)
        ref_g = bromwich_numeric("G1", {"sign": "+", "omega": 0.3}, t, p, exclude_runaway=True)
        print(f"kappa {kappa:7.1e} t {t:4.1f}: F0 rel. err {abs(f0 - ref_f) / abs(ref_f):.1e}, "
              f"G1+ rel. err {abs(g1 - ref_g) / abs(ref_g):.1e}")

p = natural_params(kappa=1e-8)
corr = ExponentialOU(1.0)
for w, t in ((0.2, 5.0), (1.0, 3.0)):
    quad, info = rate_quadrature(w, t, corr, p, full_output=True)
    exact = rate_finite_time(w, t, corr, p)
    print(f"rate at omega {w}, t {t}: residues {exact:.10e}, quadrature {quad:.10e}, "
          f"observed order {info['observed_order']:.3f}")
