"""Source-term reconstruction for time-fractional diffusion equations.

Forward and adjoint L1 solvers for d_t^alpha u + (-Laplace + 1) u = f(x) mu(t)
on the unit interval/square with Neumann boundary, an iterative thresholding
reconstruction of f from partial interior observations, and eigen-expansion
oracles for verification.
"""

from .adjoint import solve_adjoint
from .discretization import (
    EllipticOperator,
    Field,
    ObservationMask,
    SpaceGrid,
    SpaceTimeField,
    TimeGrid,
    assemble_operator,
    inner_product,
    masked_inner_product,
    norm_l2,
)
from .fraccalc import (
    FractionalOrder,
    L1Weights,
    caputo_l1,
    l1_weights,
    mittag_leffler,
    rl_integral,
    rl_integral_backward,
)
from .forward import ProblemSpec, solve_forward, solve_homogeneous
from .inversion import (
    ReconstructionConfig,
    ReconstructionResult,
    estimate_m,
    gradient,
    iterate,
    objective,
)
from .oracle import (
    EigenMode,
    PolynomialMu,
    duhamel_check,
    duhamel_theta,
    eigen_forward,
    modes_up_to,
)

__version__ = "0.1.0"

__all__ = [
    "FractionalOrder",
    "L1Weights",
    "mittag_leffler",
    "rl_integral",
    "rl_integral_backward",
    "caputo_l1",
    "l1_weights",
    "TimeGrid",
    "SpaceGrid",
    "Field",
    "SpaceTimeField",
    "ObservationMask",
    "EllipticOperator",
    "assemble_operator",
    "inner_product",
    "norm_l2",
    "masked_inner_product",
    "ProblemSpec",
    "solve_forward",
    "solve_homogeneous",
    "solve_adjoint",
    "ReconstructionConfig",
    "ReconstructionResult",
    "objective",
    "gradient",
    "iterate",
    "estimate_m",
    "EigenMode",
    "PolynomialMu",
    "modes_up_to",
    "eigen_forward",
    "duhamel_theta",
    "duhamel_check",
    "__version__",
]
