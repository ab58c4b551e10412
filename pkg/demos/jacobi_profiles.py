"""Model functions for constant and non-constant kappa.

Compares the solver with closed forms, then calibrates a symmetric profile so
that its first zero lands at a chosen point.
Run: python3 demos/jacobi_profiles.py
"""
import math

import numpy as np

from ricci_compare import KappaProfile, calibrate_symmetric, closed_form_constant, solve_jacobi

s = np.linspace(0.0, 3.0, 1000)
for k in (-1.0, 0.0, 1.0):
    mf = solve_jacobi(KappaProfile.constant(k), 3.2)
    exact, _ = closed_form_constant(k, s)
    print(f"kappa={k:+.0f}  max error {np.max(np.abs(mf.sk_at(s) - exact)):.1e}  delta={mf.delta_kappa:.12f}")

shape = KappaProfile.piecewise_polynomial([0.0, 4.0], [[1.0, 0.2, -0.2 / 3.0]])
kappa = calibrate_symmetric(shape, 3.0)
mf = solve_jacobi(kappa, 3.2)
d = mf.delta_kappa
print(f"calibrated profile: delta={d:.12f}, sk'(delta)={mf.sk_prime_at(d):.12f}, sk'(delta/2)={mf.sk_prime_at(d / 2):.1e}")
print(f"unit-curvature reference delta = {math.pi:.12f}")
