"""Command-line interface: forward solves, reconstructions, tables, verification.

All numeric CSV output is written with ``repr`` formatting, so identical
configurations and seeds reproduce byte-identical files.
"""

from __future__ import annotations

import logging
import sys

import click

from .experiments import (
    EXPERIMENT_PRESETS,
    config_from_file,
    config_from_preset,
    build_problem,
    run_experiment,
    run_table,
)
from .forward import solve_forward
from .verification import run_all_checks

def _collect_overrides(**kwargs) -> dict:
    return {k: v for k, v in kwargs.items() if v is not None}


@click.group()
@click.option("--verbose", is_flag=True, help="Log per-iteration progress.")
def main(verbose: bool) -> None:
    """Reconstruct source terms in time-fractional diffusion problems."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(name)s %(message)s",
    )


def _config(preset, config, overrides):
    if config is not None:
        return config_from_file(config, **overrides)
    if preset is None:
        raise click.UsageError("provide --preset or --config")
    return config_from_preset(preset, **overrides)


@main.command()
@click.option("--preset", type=click.Choice(sorted(EXPERIMENT_PRESETS)), default=None)
@click.option("--config", type=click.Path(exists=True), default=None, help="JSON config file.")
@click.option("--alpha", type=float, default=None)
@click.option("--n-per-axis", "n_per_axis", type=int, default=None)
@click.option("--n-steps", "n_steps", type=int, default=None)
@click.option("--out", type=click.Path(), default="u.csv", show_default=True)
def forward(preset, config, alpha, n_per_axis, n_steps, out):
    """Solve the forward problem for a preset's true source and dump u to CSV."""
    cfg = _config(preset, config, _collect_overrides(alpha=alpha, n_per_axis=n_per_axis, n_steps=n_steps))
    spec, f_true, _ = build_problem(cfg)
    u = solve_forward(spec, f_true)
    u.to_csv(out)
    click.echo(f"wrote {out}")


@main.command()
@click.option("--preset", type=click.Choice(sorted(EXPERIMENT_PRESETS)), default=None)
@click.option("--config", type=click.Path(exists=True), default=None, help="JSON config file.")
@click.option("--seed", type=int, default=None)
@click.option("--delta", type=float, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--m", type=float, default=None, help="Tuning constant M.")
@click.option("--eps", type=float, default=None)
@click.option("--rho", type=float, default=None)
@click.option("--max-iter", "max_iter", type=int, default=None)
@click.option("--outdir", type=click.Path(), default=None)
def reconstruct(preset, config, **kwargs):
    """Run one reconstruction experiment and write its CSV artifacts."""
    cfg = _config(preset, config, _collect_overrides(**kwargs))
    result = run_experiment(cfg)
    if result.err is None or not result.converged:
        err = "n/a"
    else:
        err = f"{100.0 * result.err:.2f}%"
    click.echo(
        f"K={result.iterations} err={err} converged={result.converged} -> {cfg.outdir}/"
    )
    if not result.converged:
        sys.exit(2)


@main.command()
@click.option("--id", "table_id", type=click.Choice(["1", "2"]), required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--outdir", type=click.Path(), default="results", show_default=True)
@click.option("--smoke", is_flag=True, help="Reduced 21-nodes-per-axis profile.")
def table(table_id, seed, outdir, smoke):
    """Run every row of a published table and write one summary CSV."""
    path = run_table(int(table_id), seed=seed, outdir=outdir, smoke=smoke)
    click.echo(f"wrote {path}")


@main.command()
@click.option("--fast", is_flag=True, help="Skip the slower solver-level checks.")
def verify(fast):
    """Run the oracle suite: special functions, convergence orders, adjoint pairing."""
    results = run_all_checks(fast=fast)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        click.echo(f"[{status}] {r.name}: {r.value:.3e} (bound {r.bound:.1e})")
        failed += not r.passed
    if failed:
        click.echo(f"{failed} check(s) failed")
        sys.exit(1)
    click.echo(f"all {len(results)} checks passed")


if __name__ == "__main__":
    main()
