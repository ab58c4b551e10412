"""Build the m = 1 warped product on which the comparison results are sharp.

Potential phi = 0.05 r^2, kappa = 1, n = 3. The construction closes up at
r_end where s(r_end) = pi, the equalities hold along the whole radius, and a
small perturbation of the warping function is detected.
Run: python3 demos/equality_model.py [output.csv]
"""
import sys

from ricci_compare import (
    KappaProfile,
    RadialPotential,
    build_cheng_model,
    check_blowup,
    check_myers,
    verify_equality_case,
    verify_pole_smoothness,
)
from ricci_compare.errors import EqualityViolated

model = build_cheng_model(3, KappaProfile.constant(1.0), RadialPotential.quadratic(0.05))
print(f"r_end = {model.r_end:.15f}  C_p = {model.c_p}")

rep = verify_equality_case(model)
for key, value in rep.details.items():
    print(f"{key:18s} {value:.2e}")
print("pole:", verify_pole_smoothness(model))
print("diameter bound:", check_myers(model.base, model.mf).verdict)
print("Laplacian blow-up:", check_blowup(model.base, model.mf).verdict)

try:
    verify_equality_case(model.perturbed(1e-3))
except EqualityViolated as exc:
    print("perturbed warping rejected:", exc)

if len(sys.argv) > 1:
    with open(sys.argv[1], "w") as fh:
        model.to_csv(fh)
    print("table written to", sys.argv[1])
