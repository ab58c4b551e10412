"""Weighted comparison on R^3 with drift V = r d/dr.

The unweighted Ricci curvature is zero, yet the drift makes the modified
curvature (m = 0) positive, so a constant lower bound kappa = 1/3 holds in the
re-parametrized distance s. Run: python3 demos/gaussian_model.py
"""
import math

from ricci_compare import (
    KappaProfile,
    ModelManifold,
    RadialProfile,
    check_ambrose,
    check_laplacian_comparison,
    check_myers,
    check_vm_completeness,
    find_best_constant_kappa,
    solve_jacobi,
)

mm = ModelManifold(3, 0, RadialProfile.from_selectors("r", "linear", 1.0), extent=20.0)
k = find_best_constant_kappa(mm)
print(f"best constant kappa      {k:.9f}")

mf = solve_jacobi(KappaProfile.constant(1 / 3), 5.6)
print(f"first zero delta_kappa   {mf.delta_kappa:.9f} (pi*sqrt(3) = {math.pi * math.sqrt(3):.9f})")
print(f"sup of s over the space  {mm.geodesic.s_sup:.9f} (sqrt(3 pi)/2 = {math.sqrt(3 * math.pi) / 2:.9f})")

lap = check_laplacian_comparison(mm, mf)
print(f"Laplacian comparison     {lap.verdict}, smallest margin {lap.conclusion_margin.min():.3e}")
print(f"diameter bound           {check_myers(mm, mf).verdict}")
print(f"(V,m)-completeness       {check_vm_completeness(mm)}")
dv, implied = check_ambrose(mm)
print(f"curvature integral       {dv.classification}, compactness {implied}")
print("The s-diameter stays below delta, but the space is not complete in the (V,m) sense,")
print("so no compactness follows.")
