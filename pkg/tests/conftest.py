import math

import numpy as np
import pytest

from fracsource import (
    Field,
    FractionalOrder,
    ObservationMask,
    ProblemSpec,
    SpaceGrid,
    TimeGrid,
    assemble_operator,
)
from fracsource.oracle import PolynomialMu

MU_STD = PolynomialMu((1.0, 0.0, 10.0 * math.pi))


@pytest.fixture(scope="session")
def grid41():
    return SpaceGrid(1, 41)


@pytest.fixture(scope="session")
def op41(grid41):
    return assemble_operator(grid41)


@pytest.fixture(scope="session")
def grid21():
    return SpaceGrid(1, 21)


@pytest.fixture(scope="session")
def op21(grid21):
    return assemble_operator(grid21)


@pytest.fixture
def mu_std():
    return MU_STD


def make_spec(alpha: float, op, n_steps: int = 40, T: float = 1.0) -> ProblemSpec:
    tgrid = TimeGrid(T, n_steps)
    return ProblemSpec(FractionalOrder(alpha), tgrid, op, MU_STD.sample(tgrid))


def edge_mask(grid: SpaceGrid) -> ObservationMask:
    return ObservationMask.from_boxes(grid, [[[0.0, 0.05]], [[0.95, 1.0]]])


def cos_field(grid: SpaceGrid, k: int = 1) -> Field:
    return Field.from_function(grid, lambda x: np.cos(k * np.pi * x))
