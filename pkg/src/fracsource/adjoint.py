"""Adjoint solver: backward fractional equation realized by time reversal.

With s = T - t the backward Riemann-Liouville derivative -d/dt J^{1-alpha}_{T-}
becomes the forward Caputo derivative in s, so the adjoint system is the same
L1 scheme run in reversed time with zero data at t = T (the homogeneous
terminal value of the backward problem) and source chi_omega * residual.

The reversed source is sampled so that the discrete solve is the exact
transpose of the forward time stepping with respect to the trapezoid-in-time,
mass-weighted space-time pairing: reversed step p picks the residual at time
node n_steps + 1 - p scaled by the trapezoid weight ratio (1/2 at t = T).
Together with the left-rectangle gradient quadrature in the inversion module
this makes the adjoint pairing identity hold to rounding, instead of the
O(tau) endpoint mismatch of naive reversed sampling.
"""

from __future__ import annotations

import numpy as np

from .discretization import ObservationMask, SpaceTimeField
from .forward import ProblemSpec, _step_l1

__all__ = ["solve_adjoint", "reversed_source"]


def reversed_source(
    spec: ProblemSpec, residual_values: np.ndarray, chi: np.ndarray
) -> np.ndarray:
    """Transpose-consistent reversed source sequence for the adjoint solve.

    Entry p (p >= 1) is (wt_m / tau) * chi * residual[m] with m = n_steps+1-p,
    where wt are the trapezoid weights; entry 0 is unused by the stepping.
    The t = 0 residual sample never enters (it pairs with u(.,0) = 0).
    """
    n_steps = spec.tgrid.n_steps
    wt_frac = spec.tgrid.quad_weights / spec.tgrid.tau
    weighted = (wt_frac[:, None] * residual_values) * chi[None, :]
    source = np.zeros_like(residual_values)
    source[1:] = weighted[1:][::-1]
    return source


def solve_adjoint(
    spec: ProblemSpec, residual: SpaceTimeField, mask: ObservationMask
) -> SpaceTimeField:
    """Solve the adjoint system driven by the masked residual u(f) - u_obs.

    ``residual`` is sampled on the full space-time grid; values outside omega
    are ignored (the data is interpreted as zero there).  Returns z on the
    original time orientation, with z(., T) = 0 from the reversed zero initial
    value.
    """
    if residual.grid != spec.grid or residual.tgrid != spec.tgrid:
        raise ValueError("residual grids do not match the problem spec")
    if mask.grid != spec.grid:
        raise ValueError("mask grid does not match the problem grid")
    # mask.chi is the quadrature-consistent chi_omega (half weight on the box
    # boundary), matching the omega quadrature of masked_inner_product
    source = reversed_source(spec, residual.values, mask.chi)
    z_rev = _step_l1(spec, source, np.zeros(spec.grid.n_nodes))
    return SpaceTimeField(spec.grid, spec.tgrid, z_rev[::-1].copy())
