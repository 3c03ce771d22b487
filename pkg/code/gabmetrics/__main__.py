import functools
import logging
import math
import sys
from pathlib import Path

import click
import numpy as np
import yaml

from finslerhub.config import Config
from finslerhub.constants import SprayMethod
from finslerhub.error import (
    BranchError,
    ConfigError,
    DegenerateDirection,
    DomainError,
    PreconditionError,
    SingularTensor,
    SpecMismatchError,
    StepInstability,
    StepTooLarge,
)
from finslerhub.logging import create_logger
from gabmetrics.geodesic_probe import flatness_sweep, integrate_geodesic, sample_start
from gabmetrics.indicatrix import sample_indicatrix
from gabmetrics.metric_engine import finsler_validity
from gabmetrics.metric_spec import RunConfig, load_run_config
from gabmetrics.pde_lab import (
    default_b_max,
    pde_sweep,
    transform_table,
    verify_group_laws,
    verify_solution_closure,
)
from gabmetrics.phi_families import bryant_b_o
from gabmetrics.reports import write_csv, write_json
from gabmetrics.spray_engine import (
    compute_spray,
    is_projectively_flat_at,
    spray_closed,
    spray_conformal_closed,
    spray_fd_result,
)

log = logging.getLogger(__name__)

# failures of the metric itself, as opposed to a malformed manifest
SEMANTIC_ERRORS = (
    BranchError,
    DegenerateDirection,
    DomainError,
    PreconditionError,
    SingularTensor,
    StepInstability,
    StepTooLarge,
)
# how many sweep starting points also get their sprays cross-checked
SPRAY_CHECKS = 3
VALIDITY_B_MAX = 5.0
TRANSFORM_GRID = 21
INDICATRIX_SAMPLES = 360


def exit_codes(command):
    """0 when the check passes, 1 when the metric fails it, 2 for a bad manifest"""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            passed = command(*args, **kwargs)
        except (ConfigError, SpecMismatchError) as err:
            click.echo(f"Error: {err}", err=True)
            sys.exit(2)
        except SEMANTIC_ERRORS as err:
            log.error(msg=f"{type(err).__name__}: {err}")
            click.echo(f"Failed: {err}", err=True)
            sys.exit(1)
        sys.exit(0 if passed else 1)

    return wrapper


def common_options(command):
    options = [
        click.option(
            "--config",
            "config_path",
            required=True,
            type=click.Path(exists=True, dir_okay=False),
            help="YAML run manifest",
        ),
        click.option("--out", type=click.Path(dir_okay=False), default=None),
        click.option("--seed", type=click.IntRange(min=0), default=None),
        click.option("--grid", type=click.IntRange(min=2), default=None),
        click.option("--tol", type=float, default=None),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _first(*values):
    for value in values:
        if value is not None:
            return value
    return None


def _positive(value, name: str):
    if value is not None and not value > 0:
        raise ConfigError(f"--{name} must be positive, got {value}")
    return value


def _unused(command: str, **flags):
    for name, value in flags.items():
        if value is not None:
            log.warning(msg=f"{command} does not use --{name}, ignoring {value}")


def _load(config_path, cfg: Config) -> RunConfig:
    return load_run_config(Path(config_path), nodes=cfg.QUADRATURE_NODES)


def _spray_settings(cfg: Config) -> dict:
    return {
        "fd_step": cfg.FD_STEP,
        "richardson_rtol": cfg.FD_RICHARDSON_RTOL,
        "pde_tol": cfg.PDE_PRECONDITION_TOL,
    }


def _flat_at(result, cfg: Config) -> bool:
    return is_projectively_flat_at(
        result, tol_closed=cfg.FLAT_TOL_CLOSED, tol_fd=cfg.FLAT_TOL_FD
    )


def _out(out, default: str) -> Path:
    return Path(out) if out is not None else Path(default)


@click.group()
@click.option("--debug", is_flag=True)
@click.option(
    "--defaults",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="YAML file overriding the packaged numerical defaults",
)
@click.option("--progress", is_flag=True, help="show progress bars for sweeps")
@click.pass_context
def gabmetrics(ctx, debug, defaults, progress):
    ctx.ensure_object(dict)
    try:
        ctx.obj["CONFIG"] = Config(None if defaults is None else Path(defaults))
    except (OSError, yaml.YAMLError) as err:
        raise click.UsageError(f"could not load defaults from {defaults}: {err}")
    ctx.obj["PROGRESS"] = progress
    create_logger(ctx.obj["CONFIG"], debug=debug)


@gabmetrics.command("validate")
@common_options
@click.pass_context
@exit_codes
def validate_cli(ctx, config_path, out, seed, grid, tol):
    """Check φ > 0 and the two determinant inequalities on a (b, s) grid"""
    cfg = ctx.obj["CONFIG"]
    _unused("validate", seed=seed, tol=tol)
    run = _load(config_path, cfg)
    phi = run.metric.phi
    default_max = 0.99 * phi.b_o if math.isfinite(phi.b_o) else VALIDITY_B_MAX
    b_max = _first(run.b_max, default_max)

    report = finsler_validity(
        phi,
        run.metric.dim,
        b_max,
        grid=_first(grid, run.grid, cfg.VALIDITY_GRID),
        progress=ctx.obj["PROGRESS"],
    )
    result = report.to_dict()
    result.update({"b_o": phi.b_o, "phi": phi.describe()})
    write_json(result, _out(out, "validate.json"))
    return report.valid


@gabmetrics.command("flatness")
@common_options
@click.pass_context
@exit_codes
def flatness_cli(ctx, config_path, out, seed, grid, tol):
    """Integrate geodesics from random starts and test them for straightness"""
    cfg = ctx.obj["CONFIG"]
    _unused("flatness", grid=grid)
    run = _load(config_path, cfg)
    spec = run.metric
    seed = _first(seed, run.seed, cfg.SEED)

    report = flatness_sweep(
        spec,
        samples=_first(run.samples, cfg.SAMPLES),
        seed=seed,
        steps=_first(run.steps, cfg.GEODESIC_STEPS),
        h=_first(run.h, cfg.GEODESIC_H),
        method=run.method,
        straight_tol=_positive(_first(tol, run.tol, cfg.STRAIGHT_TOL), "tol"),
        progress=ctx.obj["PROGRESS"],
    )
    result = report.to_dict()
    result.update(_spray_comparisons(spec, seed, cfg))
    write_json(result, _out(out, "flatness.json"))
    return report.is_flat


def _relative_gap(first, second) -> float:
    scale = max(float(np.linalg.norm(first.G)), float(first.y @ first.y))
    return float(np.linalg.norm(first.G - second.G)) / scale


def _spray_comparisons(spec, seed: int, cfg: Config) -> dict:
    """closed-form spray against the FD oracle and, where it applies, the
    conformal shortcut, at the first few sweep starting points"""
    rng = np.random.default_rng(seed)
    fd_gaps, conformal_gaps, skipped = [], [], 0
    for _ in range(SPRAY_CHECKS):
        x0, y0 = sample_start(spec, rng)
        try:
            closed = spray_closed(spec, x0, y0)
            fd = spray_fd_result(spec, x0, y0, cfg.FD_STEP, cfg.FD_RICHARDSON_RTOL)
            fd_gaps.append(_relative_gap(closed, fd))
        except SEMANTIC_ERRORS as err:
            log.warning(msg=f"spray comparison at {x0} skipped: {err}")
            skipped += 1
            continue
        if spec.ab.beta.closed_conformal:
            try:
                conformal = spray_conformal_closed(
                    spec, x0, y0, cfg.PDE_PRECONDITION_TOL
                )
            except PreconditionError as err:
                log.info(msg=f"conformal spray not applicable: {err}")
                continue
            conformal_gaps.append(_relative_gap(closed, conformal))

    return {
        "spray_checks": SPRAY_CHECKS,
        "spray_checks_skipped": skipped,
        "max_fd_spray_gap": max(fd_gaps) if fd_gaps else None,
        "max_conformal_spray_gap": max(conformal_gaps) if conformal_gaps else None,
    }


@gabmetrics.command("spray")
@common_options
@click.pass_context
@exit_codes
def spray_cli(ctx, config_path, out, seed, grid, tol):
    """Spray coefficients at run.x, run.y by every applicable method"""
    cfg = ctx.obj["CONFIG"]
    _unused("spray", seed=seed, grid=grid)
    run = _load(config_path, cfg)
    spec = run.metric
    if run.x is None or run.y is None:
        raise ConfigError("spray needs run.x and run.y")

    settings = _spray_settings(cfg)
    results = [compute_spray(spec, run.x, run.y, SprayMethod.CLOSED)]
    for method in (SprayMethod.CONFORMAL, SprayMethod.FD_ORACLE):
        if method == SprayMethod.CONFORMAL and not spec.ab.beta.closed_conformal:
            continue
        try:
            results.append(compute_spray(spec, run.x, run.y, method, **settings))
        except (PreconditionError, StepTooLarge) as err:
            log.warning(msg=f"{method} spray skipped: {err}")

    closed = results[0]
    result = {
        "metric": spec.label,
        "sprays": [spray.to_dict() for spray in results],
        "projectively_flat": _flat_at(closed, cfg),
        "max_gap": max(
            (_relative_gap(closed, other) for other in results[1:]), default=0.0
        ),
    }
    if tol is not None:
        result["agrees"] = result["max_gap"] < _positive(tol, "tol")
    write_json(result, _out(out, "spray.json"))
    return result.get("agrees", True)


@gabmetrics.command("geodesic")
@common_options
@click.pass_context
@exit_codes
def geodesic_cli(ctx, config_path, out, seed, grid, tol):
    """Write one RK4 geodesic as CSV, with a JSON summary next to it"""
    cfg = ctx.obj["CONFIG"]
    _unused("geodesic", grid=grid)
    run = _load(config_path, cfg)
    spec = run.metric
    seed = _first(seed, run.seed, cfg.SEED)
    x0, y0 = sample_start(spec, np.random.default_rng(seed))
    x0 = _first(run.x, x0)
    y0 = _first(run.y, y0)

    out = _out(out, "geodesic.csv")
    passed = True
    try:
        path = integrate_geodesic(
            spec,
            x0,
            y0,
            steps=_first(run.steps, cfg.GEODESIC_STEPS),
            h=_first(run.h, cfg.GEODESIC_H),
            method=run.method,
            ball_margin=cfg.BALL_MARGIN,
            drift_limit=cfg.DRIFT_LIMIT,
        )
    except StepInstability as err:
        log.error(msg=f"geodesic unstable: {err}")
        path = err.path
        passed = False

    summary = path.summary()
    summary.update({"metric": spec.label, "seed": seed, "x0": list(x0), "y0": list(y0)})
    if tol is not None:
        passed = passed and path.straightness_residual < _positive(tol, "tol")
    summary["passed"] = passed
    write_csv(path.to_frame(), out, cfg.CSV_FLOAT_FORMAT)
    write_json(summary, out.with_suffix(".json"))
    return passed


@gabmetrics.command("indicatrix")
@common_options
@click.option("--samples", type=click.IntRange(min=3), default=INDICATRIX_SAMPLES)
@click.pass_context
@exit_codes
def indicatrix_cli(ctx, config_path, out, seed, grid, tol, samples):
    """Points of {y : F(x, y) = 1} at run.x (the origin by default)"""
    cfg = ctx.obj["CONFIG"]
    _unused("indicatrix", seed=seed, grid=grid, tol=tol)
    run = _load(config_path, cfg)
    spec = run.metric
    x = _first(run.x, [0.0] * spec.dim)

    sample = sample_indicatrix(spec, x, samples=samples)
    write_csv(sample.frame, _out(out, "indicatrix.csv"), cfg.CSV_FLOAT_FORMAT)
    log.info(msg=f"indicatrix: {sample.summary()}")
    return len(sample.frame) > 0 and sample.convex is not False


@gabmetrics.command("pde")
@common_options
@click.pass_context
@exit_codes
def pde_cli(ctx, config_path, out, seed, grid, tol):
    """Residual of φ₂₂ = 2(φ₁ − sφ₁₂); with run.mu, the T_μ group laws too"""
    cfg = ctx.obj["CONFIG"]
    _unused("pde", seed=seed)
    run = _load(config_path, cfg)
    phi = run.metric.phi
    grid = _first(grid, run.grid, cfg.PDE_GRID)
    tol = _positive(_first(tol, run.tol, cfg.PDE_TOL), "tol")

    report = pde_sweep(
        phi,
        grid=grid,
        b_max=_first(run.b_max, default_b_max(phi)),
        margin=cfg.PDE_INTERIOR_MARGIN,
    )
    result = report.to_dict()
    result["tol"] = tol
    passed = report.passes(tol)
    if run.mu is not None:
        closure = verify_solution_closure(phi, run.mu, grid=grid)
        laws = verify_group_laws(phi, run.mu, _first(run.nu, 0.0))
        result["transformed"] = closure.to_dict()
        result["group_laws"] = laws.to_dict()
        passed = passed and closure.passes(tol) and laws.passes(tol)
    write_json(result, _out(out, "pde.json"))
    return passed


@gabmetrics.command("transform")
@common_options
@click.pass_context
@exit_codes
def transform_cli(ctx, config_path, out, seed, grid, tol):
    """Table of T_μ(φ) and its jet over a (b, s) grid"""
    cfg = ctx.obj["CONFIG"]
    _unused("transform", seed=seed, tol=tol)
    run = _load(config_path, cfg)
    if run.mu is None:
        raise ConfigError("transform needs run.mu")

    table = transform_table(
        run.metric.phi,
        run.mu,
        grid=_first(grid, run.grid, TRANSFORM_GRID),
        b_max=run.b_max,
    )
    write_csv(table, _out(out, "transform.csv"), cfg.CSV_FLOAT_FORMAT)
    return len(table) > 0


@gabmetrics.command("bryant-bound")
@click.option("--p", "p", type=float, required=True, help="Bryant angle in radians")
def bryant_bound_cli(p):
    """Print b_o, the bound on ‖β‖ for Bryant's φ at angle p"""
    if abs(p) >= math.pi:
        raise click.BadParameter(f"|p| must be below π, got {p}", param_hint="--p")
    click.echo(repr(bryant_b_o(p)))


def main():
    gabmetrics(obj={})


if __name__ == "__main__":
    main()
