"""Certified positive-semidefiniteness of affine matrix families over a cube.

The central object is :class:`MatrixCubeInstance`: the family
``G(d) = H_0 + sum d_i H_i`` over ``|d_i| <= radius``.  The package answers
"is G PSD on the whole cube?" by exact vertex enumeration or by searchable /
constructible algebraic certificates, and ships its own dense interior-point
SDP solver, so it has no dependencies beyond numpy.
"""

from .cube import (
    Atom,
    BenTalCertificate,
    ConstructionError,
    DualSolution,
    FullCertificate,
    MatrixCubeInstance,
    QuadraticCertificate,
    SimplexCertificate,
    VerificationResult,
    bental_test,
    build_Nm,
    construct_full_certificate,
    definite_case_certificate,
    dual_solve,
    g_poly,
    m2_certificate,
    monomial_basis_z,
    quad_margin,
    quad_test,
    rank_one_extract,
    simplex_test,
    verify_certificate,
    vertex_oracle,
)
from .apps import (
    StabilityReport,
    UncertainLinearSystem,
    WeightedGraph,
    bqp_min_lower_bound,
    bqp_to_cube,
    maxcut_bound,
    quadform_max,
    stability_feasible,
    stability_radius,
)
from .lmi import LmiProgram, SolverFailure
from .mpoly import GramForm, MatrixPoly, coeff_residual, expand_gram
from .sdp import SdpProblem, SdpSolution, solve
from .serialize import (
    certificate_from_dict,
    certificate_to_dict,
    dump_certificate,
    instance_from_dict,
    instance_to_dict,
    load_certificate,
)

__version__ = "1.0.0"
