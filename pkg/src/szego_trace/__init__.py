"""Residual and logarithmic traces of Toeplitz operators on odd spheres."""

from .contact_embed import (
    ContactPresentation,
    Embedding,
    antisymmetrize,
    pad_to_sphere,
    standard_s3,
    verify_embedding,
)
from .gaussian_model import (
    ComplexQuadraticForm,
    QuadraticPhase,
    compose_phases,
    gaussian_integral_closed,
    gaussian_integral_numeric,
)
from .koszul import KoszulLift, lift, supertrace_res, verify_c_equals_one
from .rho_calculus import (
    AsymptoticSeries,
    RhoExpr,
    expand_at_infinity,
    partial_fractions,
    rho_algebra,
    shift,
)
from .sphere_model import SphereModel, apply_rho_poly_to_log, kernel_of_operator, szego_kernel_series
from .trace_engine import (
    decompose_holonomic,
    log_trace,
    poles_and_residues,
    residual_trace,
    residue_numeric,
    zeta_numeric,
)

__version__ = "0.1.0"
