"""Samples of the indicatrix {y : F(x, y) = 1} at a fixed point, by scaling rays."""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd

from finslerhub.error import BranchError, ConfigError, DomainError, SingularTensor
from gabmetrics.metric_engine import MetricSpec, eval_F

log = logging.getLogger(__name__)

_RAY_ERRORS = (DomainError, BranchError, SingularTensor)


def ray_directions(dim: int, samples: int) -> Tuple[pd.DataFrame, np.ndarray]:
    """Angles and unit directions: `samples` equally spaced angles for dim 2, a
    samples × 2·samples (polar, azimuth) grid for dim 3"""
    if dim == 2:
        angles = 2.0 * math.pi * np.arange(samples) / samples
        directions = np.column_stack([np.cos(angles), np.sin(angles)])
        return pd.DataFrame({"angle": angles}), directions
    elif dim == 3:
        polar = math.pi * (np.arange(samples) + 0.5) / samples
        azimuth = 2.0 * math.pi * np.arange(2 * samples) / (2 * samples)
        theta, phi = np.meshgrid(polar, azimuth, indexing="ij")
        directions = np.column_stack(
            [
                (np.sin(theta) * np.cos(phi)).ravel(),
                (np.sin(theta) * np.sin(phi)).ravel(),
                np.cos(theta).ravel(),
            ]
        )
        angles = pd.DataFrame({"polar": theta.ravel(), "azimuth": phi.ravel()})
        return angles, directions
    raise ConfigError(f"indicatrix sampling needs dimension 2 or 3, got {dim}")


@dataclass
class IndicatrixSample:
    frame: pd.DataFrame
    skipped: int
    min_turn: Optional[float] = None

    @property
    def convex(self) -> Optional[bool]:
        return None if self.min_turn is None else self.min_turn > 0

    def summary(self) -> Dict:
        return {
            "points": len(self.frame),
            "skipped": self.skipped,
            "min_turn": self.min_turn,
            "convex": self.convex,
        }


def discrete_convexity(points: np.ndarray) -> float:
    """Smallest signed turn (cross product of consecutive edges) around a closed
    counter-clockwise polygon; positive everywhere means strictly convex"""
    points = np.asarray(points, dtype=float)
    forward = np.roll(points, -1, axis=0) - points
    backward = points - np.roll(points, 1, axis=0)
    turns = backward[:, 0] * forward[:, 1] - backward[:, 1] * forward[:, 0]
    return float(turns.min())


def sample_indicatrix(spec: MetricSpec, x, samples: int = 360) -> IndicatrixSample:
    """Emits y/F(x, y) for each ray direction y; rays where F can't be evaluated
    are skipped"""
    x = spec.ab.point(x)
    angles, directions = ray_directions(spec.dim, samples)
    keep = np.ones(len(directions), dtype=bool)
    points = np.empty_like(directions)
    for k, direction in enumerate(directions):
        try:
            points[k] = direction / eval_F(spec, x, direction)
        except _RAY_ERRORS as err:
            log.debug(msg=f"ray {direction} skipped: {err}")
            keep[k] = False

    frame = angles[keep].reset_index(drop=True)
    for i in range(spec.dim):
        frame[f"y{i + 1}"] = points[keep, i]
    skipped = int((~keep).sum())

    min_turn = None
    if spec.dim == 2 and skipped == 0 and len(frame) >= 3:
        min_turn = discrete_convexity(frame[["y1", "y2"]].to_numpy())
    if skipped:
        log.warning(msg=f"{skipped} indicatrix rays of {spec.label} skipped at {x}")
    return IndicatrixSample(frame=frame, skipped=skipped, min_turn=min_turn)
