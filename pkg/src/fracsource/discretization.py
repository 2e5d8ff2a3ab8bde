"""Grids, fields, observation masks and the discrete operator -Laplace + 1.

The spatial operator uses second-order finite differences on [0,1]^d with a
mirror-ghost Neumann closure.  Boundary rows are weighted by the trapezoid
mass so the stored matrix is symmetric and the operator action is self-adjoint
with respect to :func:`inner_product`; this exact pairing is what the adjoint
based gradient relies on.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import sparse

__all__ = [
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
]

Box = Sequence[Sequence[float]]  # one (lo, hi) pair per axis


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of n_steps steps on [0, T]."""

    T: float
    n_steps: int

    def __post_init__(self) -> None:
        if self.T <= 0.0 or self.n_steps < 1:
            raise ValueError("TimeGrid requires T > 0 and n_steps >= 1")

    @property
    def tau(self) -> float:
        return self.T / self.n_steps

    @property
    def nodes(self) -> NDArray[np.float64]:
        return np.linspace(0.0, self.T, self.n_steps + 1)

    @property
    def quad_weights(self) -> NDArray[np.float64]:
        """Trapezoid weights on the time nodes."""
        w = np.full(self.n_steps + 1, self.tau)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w


@dataclass(frozen=True)
class SpaceGrid:
    """Tensor-product node grid on [0, 1]^dim with n_per_axis nodes per axis."""

    dim: int
    n_per_axis: int

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError("only dim 1 and 2 are supported")
        if self.n_per_axis < 3:
            raise ValueError("need at least 3 nodes per axis")

    @property
    def h(self) -> float:
        return 1.0 / (self.n_per_axis - 1)

    @property
    def n_nodes(self) -> int:
        return self.n_per_axis**self.dim

    @property
    def axis_nodes(self) -> NDArray[np.float64]:
        return np.linspace(0.0, 1.0, self.n_per_axis)

    @property
    def coords(self) -> NDArray[np.float64]:
        """Node coordinates, shape (n_nodes, dim); axis 0 varies slowest."""
        x = self.axis_nodes
        if self.dim == 1:
            return x[:, None]
        x1, x2 = np.meshgrid(x, x, indexing="ij")
        return np.column_stack([x1.ravel(), x2.ravel()])

    @property
    def quad_weights(self) -> NDArray[np.float64]:
        """Flattened tensor-product trapezoid weights."""
        w = np.full(self.n_per_axis, self.h)
        w[0] *= 0.5
        w[-1] *= 0.5
        if self.dim == 1:
            return w
        return np.outer(w, w).ravel()


@dataclass
class Field:
    """Scalar samples on the nodes of a :class:`SpaceGrid`."""

    grid: SpaceGrid
    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_nodes,):
            raise ValueError(
                f"expected {self.grid.n_nodes} nodal values, got shape {self.values.shape}"
            )

    @classmethod
    def from_function(cls, grid: SpaceGrid, fn) -> "Field":
        c = grid.coords
        if grid.dim == 1:
            return cls(grid, np.asarray(fn(c[:, 0]), dtype=float))
        return cls(grid, np.asarray(fn(c[:, 0], c[:, 1]), dtype=float))

    @classmethod
    def constant(cls, grid: SpaceGrid, value: float) -> "Field":
        return cls(grid, np.full(grid.n_nodes, float(value)))

    def to_csv(self, path) -> None:
        """One row per node: coordinates then value."""
        coords = self.grid.coords
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x{i + 1}" for i in range(self.grid.dim)] + ["value"])
            for row, v in zip(coords, self.values):
                writer.writerow([repr(float(c)) for c in row] + [repr(float(v))])


@dataclass
class SpaceTimeField:
    """Samples on SpaceGrid x TimeGrid; values[n] is the field at time node n."""

    grid: SpaceGrid
    tgrid: TimeGrid
    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        expected = (self.tgrid.n_steps + 1, self.grid.n_nodes)
        if self.values.shape != expected:
            raise ValueError(f"expected shape {expected}, got {self.values.shape}")

    @classmethod
    def zeros(cls, grid: SpaceGrid, tgrid: TimeGrid) -> "SpaceTimeField":
        return cls(grid, tgrid, np.zeros((tgrid.n_steps + 1, grid.n_nodes)))

    def at_time(self, n: int) -> Field:
        return Field(self.grid, self.values[n].copy())

    def to_csv(self, path) -> None:
        """One row per (time node, space node): t, coordinates, value."""
        coords = self.grid.coords
        times = self.tgrid.nodes
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["t"] + [f"x{i + 1}" for i in range(self.grid.dim)] + ["value"]
            )
            for n, t in enumerate(times):
                for row, v in zip(coords, self.values[n]):
                    writer.writerow(
                        [repr(float(t))] + [repr(float(c)) for c in row] + [repr(float(v))]
                    )


@dataclass
class ObservationMask:
    """0/1 indicator of the observation subdomain omega on the grid nodes.

    Quadrature over omega aggregates the grid cells whose corners are all
    masked (trapezoid rule per cell), so box-boundary nodes carry half weight
    and the discrete measure of omega is exact; isolated masked nodes carry no
    quadrature weight.
    """

    grid: SpaceGrid
    indicator: NDArray[np.float64]

    def __post_init__(self) -> None:
        self.indicator = np.asarray(self.indicator, dtype=float)
        if self.indicator.shape != (self.grid.n_nodes,):
            raise ValueError("indicator must have one entry per node")
        if not np.all((self.indicator == 0.0) | (self.indicator == 1.0)):
            raise ValueError("indicator entries must be exactly 0 or 1")

    @property
    def quad_weights(self) -> NDArray[np.float64]:
        """Trapezoid weights of the cells contained in omega."""
        n = self.grid.n_per_axis
        h = self.grid.h
        if self.grid.dim == 1:
            ind = self.indicator
            cells = ind[:-1] * ind[1:]
            w = np.zeros(n)
            w[:-1] += 0.5 * h * cells
            w[1:] += 0.5 * h * cells
            return w
        ind = self.indicator.reshape(n, n)
        cells = ind[:-1, :-1] * ind[1:, :-1] * ind[:-1, 1:] * ind[1:, 1:]
        w = np.zeros((n, n))
        quarter = 0.25 * h * h * cells
        w[:-1, :-1] += quarter
        w[1:, :-1] += quarter
        w[:-1, 1:] += quarter
        w[1:, 1:] += quarter
        return w.ravel()

    @property
    def chi(self) -> NDArray[np.float64]:
        """Quadrature-consistent discrete indicator (0.5-weighted on d omega).

        Ratio of the omega cell weights to the full-grid trapezoid weights;
        used wherever chi_omega multiplies a field inside the equations so the
        discrete adjoint pairing matches :func:`masked_inner_product`.
        """
        return self.quad_weights / self.grid.quad_weights

    @classmethod
    def from_boxes(cls, grid: SpaceGrid, boxes: Iterable[Box]) -> "ObservationMask":
        """Nodes whose coordinates lie in any of the closed boxes."""
        coords = grid.coords
        ind = np.zeros(grid.n_nodes, dtype=bool)
        for box in boxes:
            inside = np.ones(grid.n_nodes, dtype=bool)
            for axis, (lo, hi) in enumerate(box):
                inside &= (coords[:, axis] >= lo) & (coords[:, axis] <= hi)
            ind |= inside
        if not ind.any():
            raise ValueError("observation subdomain contains no grid node")
        return cls(grid, ind.astype(float))

    @classmethod
    def from_box_complement(cls, grid: SpaceGrid, box: Box) -> "ObservationMask":
        """Nodes strictly outside the closed box (omega = Omega \\ box)."""
        coords = grid.coords
        inside = np.ones(grid.n_nodes, dtype=bool)
        for axis, (lo, hi) in enumerate(box):
            inside &= (coords[:, axis] >= lo) & (coords[:, axis] <= hi)
        ind = ~inside
        if not ind.any():
            raise ValueError("observation subdomain contains no grid node")
        return cls(grid, ind.astype(float))

    @property
    def n_active(self) -> int:
        return int(self.indicator.sum())


def _stiffness_1d(n: int, h: float) -> sparse.csr_matrix:
    # Tridiagonal (1/h) * [-1, 2, -1] with halved diagonal at the Neumann ends;
    # identical to the mass-weighted mirror-ghost finite-difference Laplacian.
    main = np.full(n, 2.0 / h)
    main[0] = main[-1] = 1.0 / h
    off = np.full(n - 1, -1.0 / h)
    return sparse.diags([off, main, off], [-1, 0, 1], format="csr")


@dataclass
class EllipticOperator:
    """Discrete -Laplace + 1 with Neumann closure on a SpaceGrid.

    ``stiffness`` is the symmetric mass-weighted Laplacian part (row sums are
    exactly zero, so the action preserves constants bitwise); adding the
    diagonal of trapezoid weights gives ``weighted_matrix``, the full
    symmetric form M = W A.  The operator action is W^-1 (K v) + v.
    """

    grid: SpaceGrid
    stiffness: sparse.csr_matrix
    mass: NDArray[np.float64]

    @property
    def weighted_matrix(self) -> sparse.csr_matrix:
        return (self.stiffness + sparse.diags(self.mass)).tocsr()

    def apply(self, values: NDArray[np.float64]) -> NDArray[np.float64]:
        return (self.stiffness @ values) / self.mass + values

    def apply_field(self, f: Field) -> Field:
        if f.grid != self.grid:
            raise ValueError("field grid does not match the operator grid")
        return Field(self.grid, self.apply(f.values))

    def rayleigh(self, values: NDArray[np.float64]) -> float:
        """Generalized Rayleigh quotient v.Mv / v.Wv of the operator."""
        num = float(values @ (self.weighted_matrix @ values))
        den = float(values @ (self.mass * values))
        return num / den


def assemble_operator(grid: SpaceGrid) -> EllipticOperator:
    """Assemble -Laplace + 1 with homogeneous Neumann boundary conditions."""
    n = grid.n_per_axis
    h = grid.h
    k1 = _stiffness_1d(n, h)
    w1 = np.full(n, h)
    w1[0] *= 0.5
    w1[-1] *= 0.5
    if grid.dim == 1:
        mass = w1
        stiffness = k1
    else:
        W1 = sparse.diags(w1)
        mass = np.outer(w1, w1).ravel()
        stiffness = (sparse.kron(k1, W1) + sparse.kron(W1, k1)).tocsr()
    return EllipticOperator(grid=grid, stiffness=stiffness, mass=mass)


def inner_product(a: Field, b: Field) -> float:
    """Trapezoid quadrature of the L2(Omega) inner product."""
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")
    return float(np.sum(a.grid.quad_weights * a.values * b.values))


def norm_l2(a: Field) -> float:
    return float(np.sqrt(max(inner_product(a, a), 0.0)))


def masked_inner_product(
    a: SpaceTimeField, b: SpaceTimeField, mask: ObservationMask
) -> float:
    """Space-time trapezoid quadrature of the L2(omega x (0,T)) inner product."""
    if a.grid != b.grid or a.tgrid != b.tgrid:
        raise ValueError("space-time fields live on different grids")
    if mask.grid != a.grid:
        raise ValueError("mask grid does not match the fields")
    wx = mask.quad_weights
    wt = a.tgrid.quad_weights
    return float(np.einsum("t,tx,x->", wt, a.values * b.values, wx))
