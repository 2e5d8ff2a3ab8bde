"""L1 time-stepping solver for d_t^alpha u + (-Laplace + 1) u = f(x) mu(t).

Each step solves (beta W + M) u^n = W rhs^n with beta = tau^-alpha/Gamma(2-alpha),
where M is the symmetric mass-weighted operator matrix and W the trapezoid mass;
the factorization is computed once per :class:`ProblemSpec` and reused across
steps and across all reconstruction iterations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import NDArray
from scipy import sparse
from scipy.sparse.linalg import splu

from .discretization import EllipticOperator, Field, SpaceTimeField, TimeGrid
from .fraccalc import FractionalOrder, l1_weights

__all__ = ["ProblemSpec", "solve_forward", "solve_homogeneous"]


@dataclass(eq=False)
class ProblemSpec:
    """Fractional order, grids, spatial operator and sampled temporal factor."""

    alpha: FractionalOrder
    tgrid: TimeGrid
    op: EllipticOperator
    mu: NDArray[np.float64]

    def __post_init__(self) -> None:
        self.mu = np.asarray(self.mu, dtype=float)
        if self.mu.shape != (self.tgrid.n_steps + 1,):
            raise ValueError("mu must be sampled on the time grid nodes")
        if not np.all(np.isfinite(self.mu)):
            raise ValueError("mu samples must be finite")

    @property
    def grid(self):
        return self.op.grid

    @property
    def l1_scale(self) -> float:
        a = self.alpha.alpha
        return self.tgrid.tau ** (-a) / math.gamma(2.0 - a)

    @cached_property
    def weights(self) -> NDArray[np.float64]:
        return l1_weights(self.alpha, self.tgrid.n_steps, self.tgrid.tau).b

    @cached_property
    def step_solver(self):
        """LU factorization of beta W + M, shared by every step."""
        beta = self.l1_scale
        system = (sparse.diags(beta * self.op.mass) + self.op.weighted_matrix).tocsc()
        lu = splu(system)
        # c0 = 1 makes the system matrix positive definite; a vanishing pivot
        # would mean the assembly is broken, so fail loudly.
        if not np.all(np.isfinite(lu.U.diagonal())) or np.any(lu.U.diagonal() == 0.0):
            raise ArithmeticError("singular implicit system; operator assembly is broken")
        return lu


def _step_l1(
    spec: ProblemSpec,
    source: NDArray[np.float64],
    initial: NDArray[np.float64],
) -> NDArray[np.float64]:
    """Run the implicit L1 scheme with per-step nodal sources.

    ``source[n]`` is the full right-hand side sample at time node n (only
    n >= 1 enters the scheme); ``initial`` is u^0.  Returns the full history
    array of shape (n_steps + 1, n_nodes).
    """
    n_steps = spec.tgrid.n_steps
    n_nodes = spec.grid.n_nodes
    beta = spec.l1_scale
    b = spec.weights
    mass = spec.op.mass
    lu = spec.step_solver

    u = np.empty((n_steps + 1, n_nodes))
    u[0] = initial
    diffs = np.empty((n_steps, n_nodes))  # diffs[k] = u^{k+1} - u^k
    for n in range(1, n_steps + 1):
        if n > 1:
            # sum_{k=1}^{n-1} b_k (u^{n-k} - u^{n-k-1}) = sum_j b_{n-1-j} diffs[j]
            hist = b[1:n][::-1] @ diffs[: n - 1]
        else:
            hist = 0.0
        rhs = beta * (u[n - 1] - hist) + source[n]
        u[n] = lu.solve(mass * rhs)
        diffs[n - 1] = u[n] - u[n - 1]
    return u


def solve_forward(spec: ProblemSpec, f: Field) -> SpaceTimeField:
    """Solve d_t^alpha u + A u = f mu(t) with u(.,0) = 0, Neumann boundary."""
    if f.grid != spec.grid:
        raise ValueError("source field grid does not match the problem grid")
    source = spec.mu[:, None] * f.values[None, :]
    u = _step_l1(spec, source, np.zeros(spec.grid.n_nodes))
    return SpaceTimeField(spec.grid, spec.tgrid, u)


def solve_homogeneous(spec: ProblemSpec, a: Field) -> SpaceTimeField:
    """Solve d_t^alpha v + A v = 0 with v(.,0) = a, Neumann boundary."""
    if a.grid != spec.grid:
        raise ValueError("initial field grid does not match the problem grid")
    source = np.zeros((spec.tgrid.n_steps + 1, spec.grid.n_nodes))
    v = _step_l1(spec, source, a.values.copy())
    return SpaceTimeField(spec.grid, spec.tgrid, v)
