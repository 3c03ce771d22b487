from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, Optional

import numpy as np
from tqdm import tqdm

from finslerhub.error import (
    BranchError,
    DegenerateDirection,
    DomainError,
    SingularTensor,
)
from gabmetrics.phi_families import PhiFamily, PhiJet, eval_jet, validity_quantities
from gabmetrics.riemann_data import AlphaBetaSpec

logger = logging.getLogger(__name__)

S_CLAMP_TOL = 1e-12
EIGEN_RTOL = 1e-12
VALIDITY_GRID = 201


@dataclass(frozen=True)
class MetricSpec:
    """A general (α,β)-metric F = α·φ(b², β/α)"""

    phi: PhiFamily
    ab: AlphaBetaSpec
    name: Optional[str] = None

    @property
    def dim(self) -> int:
        return self.ab.dim

    @property
    def label(self) -> str:
        return self.name or self.phi.label


@dataclass
class MetricPoint:
    """Everything F and its tensors need at one (x, y)"""

    x: np.ndarray
    y: np.ndarray
    a: np.ndarray
    a_inv: np.ndarray
    b: np.ndarray
    b_up: np.ndarray
    b2: float
    alpha: float
    beta: float
    s: float
    jet: PhiJet

    @property
    def F(self) -> float:
        return self.alpha * self.jet.phi

    @property
    def y_lower(self) -> np.ndarray:
        return self.a @ self.y


@dataclass(frozen=True)
class FundamentalTensorTerms:
    rho: float
    rho0: float
    rho1: float
    eta: float
    eta0: float
    eta1: float


def metric_point(
    spec: MetricSpec, x, y, s_clamp_tol: float = S_CLAMP_TOL
) -> MetricPoint:
    x = spec.ab.point(x)
    y = np.asarray(y, dtype=float)
    if not np.any(y):
        raise DegenerateDirection("y must be nonzero")

    a = spec.ab.alpha.matrix(x)
    a_inv = spec.ab.alpha.inverse(x)
    b = spec.ab.beta.covector(x)
    b_up = a_inv @ b
    b2 = float(b @ b_up)
    alpha = math.sqrt(float(y @ a @ y))
    beta = float(b @ y)

    s = beta / alpha
    bnorm = math.sqrt(b2)
    if abs(s) > bnorm:
        if abs(s) - bnorm > s_clamp_tol:
            raise DomainError(f"|s| = {abs(s)} exceeds b = {bnorm} at x={x}, y={y}")
        s = math.copysign(bnorm, s)

    jet = eval_jet(spec.phi, b2, s)
    return MetricPoint(x, y, a, a_inv, b, b_up, b2, alpha, beta, s, jet)


def eval_F(spec: MetricSpec, x, y) -> float:
    return metric_point(spec, x, y).F


def tensor_terms(jet: PhiJet, b2: float, s: float) -> FundamentalTensorTerms:
    phi, d1, d2 = validity_quantities(jet, b2, s)
    phi2, phi22 = jet.phi2, jet.phi22
    rho1 = d1 * phi2 - s * phi * phi22
    if phi == 0 or d2 == 0:
        eta = eta0 = eta1 = math.nan
    else:
        eta = -phi22 / d2
        eta0 = -rho1 / (phi * d2)
        eta1 = (s * phi + (b2 - s * s) * phi2) * rho1 / (phi * phi * d2)
    return FundamentalTensorTerms(
        rho=phi * d1,
        rho0=phi * phi22 + phi2 * phi2,
        rho1=rho1,
        eta=eta,
        eta0=eta0,
        eta1=eta1,
    )


def fundamental_tensor(spec: MetricSpec, x, y) -> np.ndarray:
    """g_ij = ρa_ij + ρ₀b_ib_j + ρ₁(b_iα_{y^j} + b_jα_{y^i}) − sρ₁α_{y^i}α_{y^j}"""
    pt = metric_point(spec, x, y)
    terms = tensor_terms(pt.jet, pt.b2, pt.s)
    alpha_y = pt.y_lower / pt.alpha
    cross = np.outer(pt.b, alpha_y)
    return (
        terms.rho * pt.a
        + terms.rho0 * np.outer(pt.b, pt.b)
        + terms.rho1 * (cross + cross.T)
        - pt.s * terms.rho1 * np.outer(alpha_y, alpha_y)
    )


def det_g(spec: MetricSpec, x, y) -> float:
    pt = metric_point(spec, x, y)
    phi, d1, d2 = validity_quantities(pt.jet, pt.b2, pt.s)
    n = spec.dim
    return phi ** (n + 1) * d1 ** (n - 2) * d2 * float(np.linalg.det(pt.a))


def _check_invertible(phi: float, d1: float, d2: float, dim: int):
    if phi <= 0:
        raise SingularTensor(f"φ = {phi} ≤ 0", quantity="phi")
    if d2 <= 0:
        raise SingularTensor(f"φ − sφ₂ + (b² − s²)φ₂₂ = {d2} ≤ 0", quantity="ineq2")
    if d1 <= 0 and (dim >= 3 or d1 == 0):
        raise SingularTensor(f"φ − sφ₂ = {d1} ≤ 0", quantity="ineq1")


def inverse_g(spec: MetricSpec, x, y) -> np.ndarray:
    """g^{ij} = ρ⁻¹{a^{ij} + ηb^ib^j + η₀α⁻¹(b^iy^j + b^jy^i) + η₁α⁻²y^iy^j}"""
    pt = metric_point(spec, x, y)
    _check_invertible(*validity_quantities(pt.jet, pt.b2, pt.s), spec.dim)
    terms = tensor_terms(pt.jet, pt.b2, pt.s)
    cross = np.outer(pt.b_up, pt.y)
    return (
        pt.a_inv
        + terms.eta * np.outer(pt.b_up, pt.b_up)
        + terms.eta0 / pt.alpha * (cross + cross.T)
        + terms.eta1 / pt.alpha ** 2 * np.outer(pt.y, pt.y)
    ) / terms.rho


def is_positive_definite(g: np.ndarray, rtol: float = EIGEN_RTOL) -> bool:
    eigenvalues = np.linalg.eigvalsh(g)
    return bool(eigenvalues.min() > rtol * np.linalg.norm(g, 2))


@dataclass
class ValidityReport:
    """
    Minima of the Finsler validity quantities over a (b, s) grid

    Parameters
    ----------
    valid :
        True if φ > 0, φ − sφ₂ + (b² − s²)φ₂₂ > 0 and, for dim ≥ 3, φ − sφ₂ > 0
        at every node
    min_ineq1 :
        minimum of φ − sφ₂
    min_ineq2 :
        minimum of φ − sφ₂ + (b² − s²)φ₂₂
    first_failure_b :
        smallest grid b with a failing node, None if valid
    """

    family: str
    dim: int
    b_max: float
    grid: int
    valid: bool = True
    min_phi: float = math.inf
    min_ineq1: float = math.inf
    min_ineq2: float = math.inf
    first_failure_b: Optional[float] = None
    domain_failures: int = 0

    def to_dict(self) -> Dict:
        return asdict(self)


def finsler_validity(
    phi: PhiFamily,
    dim: int,
    b_max: float,
    grid: int = VALIDITY_GRID,
    progress: bool = False,
) -> ValidityReport:
    """Samples |s| ≤ b ≤ b_max on a grid×grid lattice. b_max is not checked
    against b_o; nodes outside the formula's domain count as failures."""
    report = ValidityReport(family=phi.label, dim=dim, b_max=b_max, grid=grid)
    b_nodes = np.linspace(0.0, b_max, grid)

    for b in tqdm(b_nodes, disable=not progress, desc=f"validity {phi.label}"):
        b = float(b)
        b2 = b * b
        failed = False
        for s in np.linspace(-b, b, grid):
            s = float(s)
            try:
                jet = eval_jet(phi, b2, s)
            except (DomainError, BranchError) as err:
                logger.debug(msg=f"validity node b={b}, s={s} skipped: {err}")
                report.domain_failures += 1
                failed = True
                continue
            value, d1, d2 = validity_quantities(jet, b2, s)
            report.min_phi = min(report.min_phi, value)
            report.min_ineq1 = min(report.min_ineq1, d1)
            report.min_ineq2 = min(report.min_ineq2, d2)
            if value <= 0 or d2 <= 0 or (dim >= 3 and d1 <= 0):
                failed = True
        if failed and report.first_failure_b is None:
            report.first_failure_b = b
            report.valid = False

    if report.valid:
        logger.info(msg=f"{phi.label} is regular for b ≤ {b_max} in dimension {dim}")
    else:
        logger.info(
            msg=f"{phi.label} fails in dimension {dim} from b = {report.first_failure_b}"
        )
    return report


def adapted_basis(spec: MetricSpec, x) -> np.ndarray:
    """Columns e_1..e_n, orthonormal for a_ij(x), with β ∝ the last coordinate"""
    x = spec.ab.point(x)
    a = spec.ab.alpha.matrix(x)
    b = spec.ab.beta.covector(x)

    lower = np.linalg.cholesky(a)
    e0 = np.linalg.inv(lower).T
    c = e0.T @ b
    norm = np.linalg.norm(c)
    if norm == 0:
        return e0

    q, _ = np.linalg.qr(np.column_stack([c, np.eye(len(c))]))
    first = q[:, 0] * np.sign(q[:, 0] @ c)
    h = np.column_stack([q[:, 1:], first])
    return e0 @ h


def random_block_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal on the first n−1 coordinates, identity on the last. For n = 2
    this is the reflection y¹ → −y¹."""
    block = np.eye(n)
    if n == 2:
        block[0, 0] = -1.0
        return block
    q, r = np.linalg.qr(rng.standard_normal((n - 1, n - 1)))
    block[: n - 1, : n - 1] = q * np.sign(np.diag(r))
    return block


def rotation_invariance_check(
    spec: MetricSpec, x, trials: int = 100, seed: int = 42
) -> float:
    """max |F(y) − F(Ay)|/F(y) over random y and A ∈ O(n−1) acting in the adapted
    basis"""
    rng = np.random.default_rng(seed)
    basis = adapted_basis(spec, x)
    n = spec.dim

    worst = 0.0
    for _ in range(trials):
        z = rng.standard_normal(n)
        rot = random_block_orthogonal(n, rng)
        f = eval_F(spec, x, basis @ z)
        f_rot = eval_F(spec, x, basis @ (rot @ z))
        worst = max(worst, abs(f - f_rot) / f)
    logger.debug(msg=f"rotation invariance of {spec.label} at {x}: {worst:.3g}")
    return worst
