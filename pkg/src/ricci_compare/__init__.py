"""Comparison geometry numerics for weighted manifolds with m <= 1.

Model functions of the Jacobi equation, rotationally symmetric weighted model
manifolds, grid-based checks of the comparison inequalities, and the
maximal-diameter equality models.
"""
from .errors import *  # noqa: F401,F403
from .model_functions import (
    KappaProfile,
    ModelFunctions,
    calibrate_symmetric,
    closed_form_constant,
    cot_kappa,
    first_zero,
    m_kappa,
    solve_jacobi,
)
from .model_manifold import (
    GeodesicQuantities,
    ModelManifold,
    RadialProfile,
    invert_s,
    lambda_eval,
    laplacian_r,
    measure_annulus,
    measure_sublevel_s,
    model_volume,
    model_volume_r,
    modified_ricci_radial,
    s_p_eval,
    v_gamma,
    v_laplacian_r,
    volume_element,
)
from .comparison import (
    ComparisonReport,
    DivergenceVerdict,
    Tolerance,
    Verdict,
    check_ambrose,
    check_ball_growth,
    check_bg_r,
    check_bg_s,
    check_blowup,
    check_kappa0_bound,
    check_laplacian_comparison,
    check_myers,
    check_ricci_hypothesis,
    check_riccati_inequality,
    check_vm_completeness,
    check_volume_element,
    default_grid,
    find_best_constant_kappa,
)
from .rigidity import MaximalModel, RadialPotential, build_cheng_model, verify_equality_case, verify_pole_smoothness

__version__ = "0.1.0"
