from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np
import pandas as pd
from tqdm import tqdm

from finslerhub.constants import IntegrationMethod, Verdict
from finslerhub.error import (
    BranchError,
    DomainError,
    DomainExit,
    SingularTensor,
    StepInstability,
    StepTooLarge,
)
from gabmetrics.metric_engine import MetricSpec, eval_F
from gabmetrics.riemann_data import (
    ClosedConformalBeta,
    ConstCurvatureAlpha,
    ball_radius,
)
from gabmetrics.spray_engine import spray_closed, spray_vector

logger = logging.getLogger(__name__)

STEPS = 500
STEP = 1e-3
BALL_MARGIN = 0.05
DRIFT_LIMIT = 0.1
STRAIGHT_TOL = 1e-5
# where a sweep draws its starting points, as a fraction of the domain radius
SAMPLE_FRACTION = 0.5

# failures that mean the trajectory walked off the metric's domain
_EXIT_ERRORS = (DomainError, BranchError, SingularTensor)


@dataclass
class GeodesicPath:
    """
    A discretized geodesic

    Parameters
    ----------
    points, velocities :
        (steps + 1) × n arrays; fewer rows if the trajectory was truncated
    step :
        RK4 step h
    straightness_residual :
        max distance of the points from the first→last chord over the chord length
    truncated :
        True if integration stopped early at the domain boundary
    """

    points: np.ndarray
    velocities: np.ndarray
    step: float
    method: IntegrationMethod
    straightness_residual: float = 0.0
    truncated: bool = False
    max_drift: float = 0.0

    def __post_init__(self):
        self.straightness_residual = straightness(self.points)

    @property
    def times(self) -> np.ndarray:
        return self.step * np.arange(len(self.points))

    def to_frame(self) -> pd.DataFrame:
        n = self.points.shape[1]
        frame = pd.DataFrame({"t": self.times})
        for i in range(n):
            frame[f"x{i + 1}"] = self.points[:, i]
        for i in range(n):
            frame[f"v{i + 1}"] = self.velocities[:, i]
        return frame

    def summary(self) -> Dict:
        return {
            "steps": len(self.points) - 1,
            "h": self.step,
            "method": str(self.method),
            "straightness_residual": self.straightness_residual,
            "truncated": self.truncated,
            "max_drift": self.max_drift,
        }


def straightness(points: np.ndarray) -> float:
    points = np.asarray(points, dtype=float)
    chord = points[-1] - points[0]
    length = float(np.linalg.norm(chord))
    if length == 0.0:
        return 0.0
    direction = chord / length
    offsets = points - points[0]
    perpendicular = offsets - np.outer(offsets @ direction, direction)
    return float(np.linalg.norm(perpendicular, axis=1).max()) / length


def domain_radius(spec: MetricSpec) -> float:
    """Radius of the coordinate ball the metric is known to be defined on: r_μ,
    shrunk where b² = λ²|x|²/(1+μ|x|²) reaches the bound of φ. Other β fields are
    caught by DomainError during integration instead."""
    alpha, beta = spec.ab.alpha, spec.ab.beta
    radius = math.inf
    if isinstance(alpha, ConstCurvatureAlpha):
        radius = ball_radius(alpha.mu)

    if not isinstance(beta, ClosedConformalBeta) or (beta.a is not None and np.any(beta.a)):
        return radius
    bound = spec.phi.domain_bound
    if math.isfinite(bound) and beta.lam != 0:
        c = bound * bound
        denom = beta.lam ** 2 - beta.mu * c
        if denom > 0:
            radius = min(radius, math.sqrt(c / denom))
    return radius


def integrate_geodesic(
    spec: MetricSpec,
    x0,
    y0,
    steps: int = STEPS,
    h: float = STEP,
    method: IntegrationMethod = IntegrationMethod.CLOSED_FORM,
    ball_margin: float = BALL_MARGIN,
    drift_limit: float = DRIFT_LIMIT,
    raise_on_exit: bool = False,
) -> GeodesicPath:
    """Classic RK4 on (x, v) ↦ (v, −2G(x, v)).

    Stops early with `truncated` set when the next state would leave the ball of
    `domain_radius` less `ball_margin`, or when any stage evaluation leaves the
    metric's domain. Raises StepInstability when F(x, v) drifts by more than
    `drift_limit` relative to its starting value.
    """
    x = spec.ab.point(x0)
    v = np.asarray(y0, dtype=float)
    spray_method = IntegrationMethod(method).spray_method
    limit = domain_radius(spec) - ball_margin

    def rhs(xx, vv):
        return vv, -2.0 * spray_vector(spec, xx, vv, spray_method)

    points: List[np.ndarray] = [x]
    velocities: List[np.ndarray] = [v]
    f0 = eval_F(spec, x, v)
    max_drift = 0.0
    truncated = False

    def partial():
        return GeodesicPath(
            np.array(points),
            np.array(velocities),
            h,
            IntegrationMethod(method),
            truncated=truncated,
            max_drift=max_drift,
        )

    for step in range(steps):
        try:
            k1x, k1v = rhs(x, v)
            k2x, k2v = rhs(x + 0.5 * h * k1x, v + 0.5 * h * k1v)
            k3x, k3v = rhs(x + 0.5 * h * k2x, v + 0.5 * h * k2v)
            k4x, k4v = rhs(x + h * k3x, v + h * k3v)
            x_next = x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            v_next = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            if np.linalg.norm(x_next) >= limit:
                raise DomainError(f"|x| = {np.linalg.norm(x_next)} past {limit}")
            f = eval_F(spec, x_next, v_next)
        except _EXIT_ERRORS as err:
            truncated = True
            logger.debug(
                msg=f"geodesic from {points[0]} left the domain at step {step}: {err}"
            )
            path = partial()
            if raise_on_exit:
                raise DomainExit(str(err), path=path)
            return path

        drift = abs(f - f0) / f0
        max_drift = max(max_drift, drift)
        x, v = x_next, v_next
        points.append(x)
        velocities.append(v)
        if drift > drift_limit:
            raise StepInstability(
                f"F(x, v) drifted by {drift:.3g} at step {step + 1}",
                path=partial(),
                drift=drift,
            )

    return partial()


def resample_by_arclength(points: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Points at the given arc lengths along the polyline, measured from its start"""
    points = np.asarray(points, dtype=float)
    segments = np.linalg.norm(np.diff(points, axis=0), axis=1)
    cumulative = np.concatenate([[0.0], np.cumsum(segments)])
    return np.column_stack(
        [np.interp(lengths, cumulative, points[:, i]) for i in range(points.shape[1])]
    )


def path_overlap(path: GeodesicPath, other: GeodesicPath, samples: int = 50) -> float:
    """max pointwise distance after both paths are put on a common arc-length grid"""
    length = min(_length(path.points), _length(other.points))
    grid = np.linspace(0.0, length, samples)
    first = resample_by_arclength(path.points, grid)
    second = resample_by_arclength(other.points, grid)
    return float(np.linalg.norm(first - second, axis=1).max())


def _length(points: np.ndarray) -> float:
    return float(np.linalg.norm(np.diff(points, axis=0), axis=1).sum())


@dataclass
class FlatnessReport:
    metric: str
    samples: int
    seed: int
    completed: int = 0
    truncated: int = 0
    unstable: int = 0
    max_straightness: float = math.nan
    median_straightness: float = math.nan
    max_projective_residual: float = math.nan
    median_projective_residual: float = math.nan
    fd_warnings: int = 0
    verdict: Verdict = Verdict.NOT_FLAT
    straightness_residuals: List[float] = field(default_factory=list, repr=False)
    projective_residuals: List[float] = field(default_factory=list, repr=False)

    @property
    def is_flat(self) -> bool:
        return self.verdict.is_flat

    def to_dict(self) -> Dict:
        return {
            "metric": self.metric,
            "samples": self.samples,
            "seed": self.seed,
            "completed": self.completed,
            "truncated": self.truncated,
            "unstable": self.unstable,
            "max_straightness": self.max_straightness,
            "median_straightness": self.median_straightness,
            "max_projective_residual": self.max_projective_residual,
            "median_projective_residual": self.median_projective_residual,
            "fd_warnings": self.fd_warnings,
            "verdict": str(self.verdict),
        }


def sample_start(spec: MetricSpec, rng: np.random.Generator):
    """A starting point uniformly in the inner part of the domain and a unit
    direction"""
    n = spec.dim
    radius = SAMPLE_FRACTION * min(domain_radius(spec), 1.0)
    direction = rng.standard_normal(n)
    direction /= np.linalg.norm(direction)
    x0 = radius * rng.uniform() ** (1.0 / n) * direction
    y0 = rng.standard_normal(n)
    return x0, y0 / np.linalg.norm(y0)


def flatness_sweep(
    spec: MetricSpec,
    samples: int = 20,
    seed: int = 42,
    steps: int = STEPS,
    h: float = STEP,
    method: IntegrationMethod = IntegrationMethod.CLOSED_FORM,
    straight_tol: float = STRAIGHT_TOL,
    progress: bool = False,
) -> FlatnessReport:
    rng = np.random.default_rng(seed)
    report = FlatnessReport(metric=spec.label, samples=samples, seed=seed)

    for _ in tqdm(range(samples), disable=not progress, desc=f"flatness {spec.label}"):
        x0, y0 = sample_start(spec, rng)
        try:
            report.projective_residuals.append(spray_closed(spec, x0, y0).residual)
        except _EXIT_ERRORS as err:
            logger.warning(msg=f"no spray at x0={x0}: {err}")
            report.truncated += 1
            continue

        try:
            path = integrate_geodesic(spec, x0, y0, steps=steps, h=h, method=method)
        except StepInstability as err:
            logger.warning(msg=f"unstable geodesic from {x0}: {err}")
            report.unstable += 1
            continue
        except StepTooLarge as err:
            logger.warning(msg=f"FD spray unreliable along geodesic from {x0}: {err}")
            report.fd_warnings += 1
            continue

        if path.truncated:
            report.truncated += 1
            continue
        report.completed += 1
        report.straightness_residuals.append(path.straightness_residual)

    if report.straightness_residuals:
        report.max_straightness = float(np.max(report.straightness_residuals))
        report.median_straightness = float(np.median(report.straightness_residuals))
        if report.max_straightness < straight_tol:
            report.verdict = Verdict.FLAT
    if report.projective_residuals:
        report.max_projective_residual = float(np.max(report.projective_residuals))
        report.median_projective_residual = float(
            np.median(report.projective_residuals)
        )

    logger.info(
        msg=f"{spec.label}: {report.verdict}, {report.completed}/{samples} geodesics, "
        f"max straightness {report.max_straightness:.3g}"
    )
    return report
