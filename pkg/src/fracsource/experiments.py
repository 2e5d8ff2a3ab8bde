"""Experiment harness: presets, seeded noise synthesis, runners and CSV output.

The presets reproduce the published 1D/2D test cases; all of them share
T = 1, mu(t) = 1 + 10 pi t^2, rho = 1e-5 and the constant initial guess
f_0 = 2 on a 41-nodes-per-axis, 40-step space-time mesh.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .discretization import Field, ObservationMask, SpaceGrid, SpaceTimeField, TimeGrid, assemble_operator
from .forward import ProblemSpec, solve_forward
from .fraccalc import FractionalOrder
from .inversion import ReconstructionConfig, ReconstructionResult, iterate
from .oracle import PolynomialMu

__all__ = [
    "SplitMix64",
    "ExperimentConfig",
    "F_TRUE_PRESETS",
    "OMEGA_PRESETS",
    "EXPERIMENT_PRESETS",
    "TABLE_ROWS",
    "config_from_preset",
    "build_problem",
    "synthesize_observation",
    "run_experiment",
    "run_table",
]

MU = PolynomialMu((1.0, 0.0, 10.0 * math.pi))

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 generator (public domain; Steele, Lea & Flood 2014).

    state <- state + 0x9E3779B97F4A7C15; the output mix is
    z = state; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB; return z ^ (z >> 31).
    Uniform doubles use the top 53 bits divided by 2^53.
    """

    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK64

    def next_uint64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform draw in [0, 1) with 53-bit resolution."""
        return (self.next_uint64() >> 11) * 2.0**-53

    def symmetric(self) -> float:
        """Uniform draw in [-1, 1)."""
        return 2.0 * self.uniform() - 1.0


def _f_51a(x):
    return np.sin(np.pi * x) + x - 3.0


def _f_51b(x):
    return np.sin(np.pi * x) - 1.5


def _f_52(x):
    return -np.sin(np.pi * x / 2.0) - x**2 + 3.0


def _f_53a(x1, x2):
    return x1 + x2 + 1.0


def _f_53b(x1, x2):
    return np.cos(np.pi * x1) * np.cos(np.pi * x2) + 2.0


def _f_54(x1, x2):
    return np.exp((x1 + x2) / 2.0) + 1.0


F_TRUE_PRESETS: dict[str, Callable] = {
    "sin_plus_linear": _f_51a,
    "sin_minus_3_2": _f_51b,
    "half_sine_quadratic": _f_52,
    "plane_2d": _f_53a,
    "cosine_bump_2d": _f_53b,
    "exp_ridge_2d": _f_54,
}


def _frame_boxes(a: float, b: float) -> list:
    """Omega \\ [a,b]^2 as a union of four closed edge bands."""
    return [
        [[0.0, a], [0.0, 1.0]],
        [[b, 1.0], [0.0, 1.0]],
        [[0.0, 1.0], [0.0, a]],
        [[0.0, 1.0], [b, 1.0]],
    ]


# omega presets as unions of closed boxes; nodes on the box boundary belong to
# omega and the cell quadrature then reproduces |omega| exactly.
OMEGA_PRESETS: dict[str, dict] = {
    "edges_0.05": {"boxes": [[[0.0, 0.05]], [[0.95, 1.0]]], "label": "(0,0.05)u(0.95,1)"},
    "edges_0.2": {"boxes": [[[0.0, 0.2]], [[0.8, 1.0]]], "label": "(0,0.2)u(0.8,1)"},
    "edges_0.1": {"boxes": [[[0.0, 0.1]], [[0.9, 1.0]]], "label": "(0,0.1)u(0.9,1)"},
    "edges_0.025": {"boxes": [[[0.0, 0.025]], [[0.975, 1.0]]], "label": "(0,0.025)u(0.975,1)"},
    "frame_0.1_0.9": {"boxes": _frame_boxes(0.1, 0.9), "label": "O\\[0.1,0.9]^2"},
    "frame_0.1_0.8": {"boxes": _frame_boxes(0.1, 0.8), "label": "O\\[0.1,0.8]^2"},
    "frame_0.05_0.95": {"boxes": _frame_boxes(0.05, 0.95), "label": "O\\[0.05,0.95]^2"},
    "three_edges": {
        "boxes": [
            [[0.9, 1.0], [0.0, 1.0]],
            [[0.0, 1.0], [0.0, 0.1]],
            [[0.0, 1.0], [0.9, 1.0]],
        ],
        "label": "O\\[0,0.9]x[0.1,0.9]",
    },
}


_EXPR_NAMES = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "pi": np.pi}


def _expr_function(expr: str, dim: int) -> Callable:
    """Compile an f_true expression over sin, cos, exp, pi and x1[, x2]."""
    code = compile(expr, "<f_true>", "eval")
    allowed = set(_EXPR_NAMES) | ({"x1"} if dim == 1 else {"x1", "x2"})
    unknown = set(code.co_names) - allowed
    if unknown:
        raise ValueError(f"f_true expression uses unsupported names: {sorted(unknown)}")

    def fn(*coords):
        scope = dict(_EXPR_NAMES)
        scope.update({f"x{i + 1}": c for i, c in enumerate(coords)})
        # the trailing zero term broadcasts constant expressions to arrays
        return eval(code, {"__builtins__": {}}, scope) + 0.0 * coords[0]

    return fn


def _resolve_f_true(name: str, dim: int) -> Callable:
    if name in F_TRUE_PRESETS:
        return F_TRUE_PRESETS[name]
    return _expr_function(name, dim)


def _omega_boxes_and_label(omega) -> tuple[list, str]:
    if isinstance(omega, str):
        preset = OMEGA_PRESETS[omega]
        return preset["boxes"], preset["label"]
    label = "u".join(
        "x".join(f"[{lo:g},{hi:g}]" for lo, hi in box) for box in omega
    )
    return list(omega), label


@dataclass(frozen=True)
class ExperimentConfig:
    """One reconstruction run; fields mirror the published experiment settings.

    ``f_true`` is a preset name or an expression over sin, cos, exp, pi and
    x1[, x2]; ``omega`` is a preset name or a list of closed coordinate boxes
    inside [0,1]^dim.
    """

    dim: int
    alpha: float
    f_true: str
    omega: object
    delta: float
    m: float
    eps: float
    seed: int = 0
    n_per_axis: int = 41
    n_steps: int = 40
    T: float = 1.0
    rho: float = 1e-5
    f0: float = 2.0
    max_iter: int = 1000
    outdir: str = "results"
    label: str = ""

    def __post_init__(self) -> None:
        if self.delta < 0.0:
            raise ValueError("noise level delta must be >= 0")
        _resolve_f_true(self.f_true, self.dim)  # raises on bad preset/expression
        if isinstance(self.omega, str):
            if self.omega not in OMEGA_PRESETS:
                raise ValueError(f"unknown omega preset {self.omega!r}")
        else:
            for box in self.omega:
                if len(box) != self.dim:
                    raise ValueError("omega boxes must have one interval per axis")
                for lo, hi in box:
                    if not 0.0 <= lo <= hi <= 1.0:
                        raise ValueError("omega boxes must lie within [0,1]^dim")
        for name in ("rho", "m", "eps", "T"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


# Published experiment settings: example id -> configuration.
EXPERIMENT_PRESETS: dict[str, ExperimentConfig] = {
    "5.1a": ExperimentConfig(
        dim=1, alpha=0.3, f_true="sin_plus_linear", omega="edges_0.05",
        delta=0.02, m=2.0, eps=1e-3, label="5.1a",
    ),
    "5.1b": ExperimentConfig(
        dim=1, alpha=0.5, f_true="sin_minus_3_2", omega="edges_0.05",
        delta=0.02, m=1.0, eps=1e-3, label="5.1b",
    ),
    "5.3a": ExperimentConfig(
        dim=2, alpha=0.3, f_true="plane_2d", omega="frame_0.1_0.9",
        delta=0.01, m=2.0, eps=0.01 / 3.0, label="5.3a",
    ),
    "5.3b": ExperimentConfig(
        dim=2, alpha=0.5, f_true="cosine_bump_2d", omega="frame_0.1_0.9",
        delta=0.01, m=2.0, eps=0.01 / 3.0, label="5.3b",
    ),
}

# Table rows: (delta, omega preset, reference err %, reference K).
TABLE_ROWS: dict[int, list[tuple[float, str, float, int]]] = {
    1: [
        (0.005, "edges_0.05", 2.87, 51),
        (0.01, "edges_0.05", 3.61, 51),
        (0.02, "edges_0.05", 5.38, 51),
        (0.04, "edges_0.05", 9.35, 50),
        (0.02, "edges_0.2", 4.11, 20),
        (0.02, "edges_0.1", 4.05, 31),
        (0.02, "edges_0.025", 9.89, 79),
    ],
    2: [
        (0.005, "frame_0.1_0.9", 3.25, 35),
        (0.01, "frame_0.1_0.9", 4.69, 26),
        (0.02, "frame_0.1_0.9", 7.11, 17),
        (0.04, "frame_0.1_0.9", 10.31, 8),
        (0.01, "frame_0.1_0.8", 3.63, 21),
        (0.01, "frame_0.05_0.95", 6.70, 42),
        (0.01, "three_edges", 5.46, 22),
    ],
}


def table_base_config(table_id: int, smoke: bool = False) -> ExperimentConfig:
    """Shared settings of a table: alpha = 0.8 with the table's f_true and eps rule."""
    if table_id == 1:
        base = ExperimentConfig(
            dim=1, alpha=0.8, f_true="half_sine_quadratic", omega="edges_0.05",
            delta=0.02, m=1.0, eps=1e-3, label="table1",
        )
    elif table_id == 2:
        base = ExperimentConfig(
            dim=2, alpha=0.8, f_true="exp_ridge_2d", omega="frame_0.1_0.9",
            delta=0.01, m=2.0, eps=0.01 / 5.0, label="table2",
        )
    else:
        raise ValueError("table id must be 1 or 2")
    if smoke:
        base = replace(base, n_per_axis=21)
    return base


def config_from_preset(name: str, **overrides) -> ExperimentConfig:
    if name not in EXPERIMENT_PRESETS:
        raise ValueError(
            f"unknown preset {name!r}; available: {sorted(EXPERIMENT_PRESETS)}"
        )
    return replace(EXPERIMENT_PRESETS[name], **overrides)


def config_from_file(path: str, **overrides) -> ExperimentConfig:
    """Load a flat JSON config; explicit keyword overrides win."""
    with open(path) as fh:
        data = json.load(fh)
    if "preset" in data:
        preset = data.pop("preset")
        data.update(overrides)
        return config_from_preset(preset, **data)
    data.update(overrides)
    return ExperimentConfig(**data)


def build_mask(cfg: ExperimentConfig, grid: SpaceGrid) -> ObservationMask:
    boxes, _ = _omega_boxes_and_label(cfg.omega)
    return ObservationMask.from_boxes(grid, boxes)


def build_problem(cfg: ExperimentConfig) -> tuple[ProblemSpec, Field, ObservationMask]:
    """Grids, operator, true source field and observation mask for a config."""
    grid = SpaceGrid(dim=cfg.dim, n_per_axis=cfg.n_per_axis)
    tgrid = TimeGrid(T=cfg.T, n_steps=cfg.n_steps)
    op = assemble_operator(grid)
    spec = ProblemSpec(
        alpha=FractionalOrder(cfg.alpha), tgrid=tgrid, op=op, mu=MU.sample(tgrid)
    )
    f_true = Field.from_function(grid, _resolve_f_true(cfg.f_true, cfg.dim))
    mask = build_mask(cfg, grid)
    return spec, f_true, mask


def synthesize_observation(
    spec: ProblemSpec,
    f_true: Field,
    mask: ObservationMask,
    delta: float,
    seed: int,
) -> SpaceTimeField:
    """Noisy observation u_obs = (1 + delta rand(-1,1)) u(f_true) on omega, 0 outside.

    Draws come from :class:`SplitMix64`; the order is masked nodes by ascending
    flat index, and for each node all time nodes 0..n_steps, so a fixed seed
    reproduces the observation bitwise.
    """
    u = solve_forward(spec, f_true)
    obs = np.zeros_like(u.values)
    rng = SplitMix64(seed)
    active = np.flatnonzero(mask.indicator)
    n_times = spec.tgrid.n_steps + 1
    for idx in active:
        for n in range(n_times):
            obs[n, idx] = (1.0 + delta * rng.symmetric()) * u.values[n, idx]
    return SpaceTimeField(spec.grid, spec.tgrid, obs)


def run_reconstruction(cfg: ExperimentConfig) -> tuple[ReconstructionResult, Field, Field]:
    """Full pipeline without file output; returns (result, f_true, f0 field)."""
    spec, f_true, mask = build_problem(cfg)
    u_obs = synthesize_observation(spec, f_true, mask, cfg.delta, cfg.seed)
    f0 = Field.constant(spec.grid, cfg.f0)
    rcfg = ReconstructionConfig(
        rho=cfg.rho, m=cfg.m, eps=cfg.eps, f0=f0, max_iter=cfg.max_iter
    )
    result = iterate(spec, u_obs, mask, rcfg, f_true=f_true)
    return result, f_true, f0


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x: float) -> str:
    return repr(float(x))


def _err_cell(result: ReconstructionResult) -> str:
    """Relative error in percent, or an empty cell for a diverged run."""
    if result.err is None or not result.converged or not math.isfinite(result.err):
        return ""
    return _fmt(100.0 * result.err)


def run_experiment(cfg: ExperimentConfig) -> ReconstructionResult:
    """Run one reconstruction and write profile, iteration-log and summary CSVs.

    Files land in ``cfg.outdir`` prefixed by the config label:
    ``<label>_profile.csv`` (coordinates, f_true, f_k), ``<label>_iterations.csv``
    (k, phi) and ``<label>_summary.csv`` with the fixed column order
    (delta, omega, err_percent, K).
    """
    result, f_true, _ = run_reconstruction(cfg)
    grid = f_true.grid
    tag = cfg.label or "run"

    profile_rows = [
        [_fmt(c) for c in coord] + [_fmt(ft), _fmt(fk)]
        for coord, ft, fk in zip(grid.coords, f_true.values, result.f_k.values)
    ]
    _write_csv(
        os.path.join(cfg.outdir, f"{tag}_profile.csv"),
        [f"x{i + 1}" for i in range(grid.dim)] + ["f_true", "f_k"],
        profile_rows,
    )
    _write_csv(
        os.path.join(cfg.outdir, f"{tag}_iterations.csv"),
        ["k", "phi"],
        [[k, _fmt(phi)] for k, phi in enumerate(result.phi_history)],
    )
    _write_csv(
        os.path.join(cfg.outdir, f"{tag}_summary.csv"),
        ["delta", "omega", "err_percent", "K"],
        [[
            _fmt(cfg.delta),
            _omega_boxes_and_label(cfg.omega)[1],
            _err_cell(result),
            result.iterations,
        ]],
    )
    return result


def run_table(
    table_id: int, seed: int = 0, outdir: str = "results", smoke: bool = False
) -> str:
    """Run every row of a published table and write one summary CSV.

    Columns: delta, omega, err_percent, K, ref_err_percent, ref_K.
    Returns the CSV path.
    """
    base = table_base_config(table_id, smoke=smoke)
    rows = []
    for delta, omega, ref_err, ref_k in TABLE_ROWS[table_id]:
        eps = base.eps
        if table_id == 2:
            eps = delta / 5.0
        cfg = replace(base, delta=delta, omega=omega, eps=eps, seed=seed)
        result, _, _ = run_reconstruction(cfg)
        rows.append([
            _fmt(delta),
            OMEGA_PRESETS[omega]["label"],
            _err_cell(result),
            result.iterations,
            _fmt(ref_err),
            ref_k,
        ])
    name = f"table{table_id}_seed{seed}" + ("_smoke" if smoke else "") + ".csv"
    path = os.path.join(outdir, name)
    _write_csv(
        path,
        ["delta", "omega", "err_percent", "K", "ref_err_percent", "ref_K"],
        rows,
    )
    return path
