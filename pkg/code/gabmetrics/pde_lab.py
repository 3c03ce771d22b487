"""Checks of the projective-flatness equation φ₂₂ = 2(φ₁ − sφ₁₂) and of the
T_μ transformation group acting on its solutions."""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, Iterator, Optional, Tuple

import numpy as np
import pandas as pd

from finslerhub.error import BranchError, DomainError
from gabmetrics.metric_engine import MetricSpec, eval_F
from gabmetrics.phi_families import (
    ClassicalSquarePhi,
    MuTransformedPhi,
    PhiFamily,
    PhiJet,
    eval_jet,
)
from gabmetrics.riemann_data import (
    AlphaBetaSpec,
    ClosedConformalBeta,
    ConstCurvatureAlpha,
)

logger = logging.getLogger(__name__)

PDE_GRID = 101
INTERIOR_MARGIN = 1e-3
TRANSFORM_COLUMNS = ["b", "s", "phi", "phi1", "phi2", "phi12", "phi22"]


def jet_residual(jet: PhiJet, s: float) -> float:
    return abs(jet.phi22 - 2.0 * (jet.phi1 - s * jet.phi12))


def pde_residual(family: PhiFamily, b2: float, s: float) -> float:
    """|φ₂₂ − 2(φ₁ − sφ₁₂)| from the analytic jet"""
    return jet_residual(eval_jet(family, b2, s), s)


def pde_residual_classical(b2: float, s: float) -> float:
    """The same residual for φ(s) = (1+s)², where φ₁ = φ₁₂ = 0"""
    return pde_residual(ClassicalSquarePhi(), b2, s)


def default_b_max(family: PhiFamily) -> float:
    """min(0.9·b_o, 1): keeps grids clear of the singular edge of every shipped
    family"""
    return min(0.9 * family.b_o, 1.0)


def interior_grid(
    b_max: float, grid: int = PDE_GRID, margin: float = INTERIOR_MARGIN
) -> Iterator[Tuple[float, float]]:
    """(b², s) nodes with 0 < b ≤ b_max and |s| ≤ (1 − margin)·b"""
    for b in np.linspace(0.0, b_max, grid)[1:]:
        b = float(b)
        for s in np.linspace(-(1.0 - margin) * b, (1.0 - margin) * b, grid):
            yield b * b, float(s)


@dataclass
class PdeReport:
    """
    Parameters
    ----------
    max_residual :
        max over interior nodes of |φ₂₂ − 2(φ₁ − sφ₁₂)|, an absolute residual
    argmax_node :
        (b², s) where the max is attained
    skipped :
        nodes outside the family's domain
    """

    family: str
    grid: int
    b_max: float
    max_residual: float = 0.0
    argmax_node: Optional[Tuple[float, float]] = None
    skipped: int = 0

    def passes(self, tol: float) -> bool:
        return self.max_residual < tol

    def to_dict(self) -> Dict:
        out = asdict(self)
        out["argmax_node"] = None if self.argmax_node is None else list(self.argmax_node)
        return out


def pde_sweep(
    family: PhiFamily,
    grid: int = PDE_GRID,
    b_max: Optional[float] = None,
    margin: float = INTERIOR_MARGIN,
) -> PdeReport:
    if b_max is None:
        b_max = default_b_max(family)
    report = PdeReport(family=family.label, grid=grid, b_max=b_max)
    for b2, s in interior_grid(b_max, grid, margin):
        try:
            residual = pde_residual(family, b2, s)
        except (DomainError, BranchError):
            report.skipped += 1
            continue
        if residual > report.max_residual or report.argmax_node is None:
            report.max_residual = residual
            report.argmax_node = (b2, s)

    if report.skipped:
        logger.warning(msg=f"{family.label}: {report.skipped} PDE nodes outside domain")
    logger.info(msg=f"{family.label}: max PDE residual {report.max_residual:.3g}")
    return report


@dataclass
class GroupLawReport:
    family: str
    mu: float
    nu: float
    grid: int
    identity_deviation: float = 0.0
    composition_deviation: float = 0.0
    skipped: int = 0

    def passes(self, tol: float) -> bool:
        return max(self.identity_deviation, self.composition_deviation) < tol

    def to_dict(self) -> Dict:
        return asdict(self)


def _jet_deviation(first: PhiJet, second: PhiJet) -> float:
    return float(np.max(np.abs(np.subtract(first.as_tuple(), second.as_tuple()))))


def verify_group_laws(
    base: PhiFamily,
    mu: float,
    nu: float,
    grid: int = 20,
    b_max: Optional[float] = None,
) -> GroupLawReport:
    """max|T₀(φ) − φ| and max|T_μ(T_ν(φ)) − T_{μ+ν}(φ)| over the grid, comparing
    whole jets"""
    if b_max is None:
        b_max = min(default_b_max(base), 0.8)
    identity = MuTransformedPhi(base=base, mu=0.0)
    composed = MuTransformedPhi(base=MuTransformedPhi(base=base, mu=nu), mu=mu)
    direct = MuTransformedPhi(base=base, mu=mu + nu)

    report = GroupLawReport(family=base.label, mu=mu, nu=nu, grid=grid)
    for b2, s in interior_grid(b_max, grid):
        try:
            report.identity_deviation = max(
                report.identity_deviation,
                _jet_deviation(eval_jet(identity, b2, s), eval_jet(base, b2, s)),
            )
            report.composition_deviation = max(
                report.composition_deviation,
                _jet_deviation(eval_jet(composed, b2, s), eval_jet(direct, b2, s)),
            )
        except (DomainError, BranchError):
            report.skipped += 1

    if report.skipped:
        logger.warning(msg=f"group laws on {base.label}: {report.skipped} nodes skipped")
    return report


def verify_solution_closure(
    base: PhiFamily, mu: float, grid: int = PDE_GRID, b_max: Optional[float] = None
) -> PdeReport:
    """PDE residual of T_μ(φ)"""
    transformed = MuTransformedPhi(base=base, mu=mu)
    if b_max is None:
        b_max = default_b_max(transformed)
    return pde_sweep(transformed, grid=grid, b_max=b_max)


def representation_spec(phi: PhiFamily, nu: float, dim: int) -> MetricSpec:
    """F = α_ν·φ(b²_ν, β_ν/α_ν) with β_ν the λ = 1, a = 0 conformal form"""
    return MetricSpec(
        phi=phi,
        ab=AlphaBetaSpec(
            dim=dim,
            alpha=ConstCurvatureAlpha(mu=nu),
            beta=ClosedConformalBeta(mu=nu, lam=1.0),
        ),
    )


def equivalence_of_representations(
    phi: PhiFamily, mu: float, nu: float, x, y
) -> float:
    """Relative gap between α_ν·φ_μ(b²_ν, β_ν/α_ν) and |y|·φ_{μ+ν}(|x|², ⟨x,y⟩/|y|)"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    lhs = eval_F(representation_spec(MuTransformedPhi(base=phi, mu=mu), nu, n), x, y)
    rhs = eval_F(
        representation_spec(MuTransformedPhi(base=phi, mu=mu + nu), 0.0, n), x, y
    )
    return abs(lhs - rhs) / abs(rhs)


def constant_transform_closed_form(mu: float, b2: float, s: float) -> float:
    """T_μ(1) = √(1+μ(b²−s²))/(1+μb²)"""
    return math.sqrt(1.0 + mu * (b2 - s * s)) / (1.0 + mu * b2)


def transform_table(
    base: PhiFamily, mu: float, grid: int = 21, b_max: Optional[float] = None
) -> pd.DataFrame:
    """φ_μ and its jet on a (b, s) grid, one row per node"""
    transformed = MuTransformedPhi(base=base, mu=mu)
    if b_max is None:
        b_max = min(default_b_max(transformed), 0.9)

    rows = []
    for b in np.linspace(0.0, b_max, grid):
        b = float(b)
        for s in np.linspace(-b, b, grid):
            s = float(s)
            try:
                jet = eval_jet(transformed, b * b, s)
            except (DomainError, BranchError):
                continue
            rows.append(
                {
                    "b": b,
                    "s": s,
                    "phi": jet.phi,
                    "phi1": jet.phi1,
                    "phi2": jet.phi2,
                    "phi12": jet.phi12,
                    "phi22": jet.phi22,
                }
            )
    return pd.DataFrame(rows, columns=TRANSFORM_COLUMNS)
