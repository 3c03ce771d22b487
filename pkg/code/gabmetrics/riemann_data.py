"""Riemannian side of a general (α,β)-metric: the metric α, the 1-form β, the
Levi-Civita connection of α and the covariant derivative of β with the
contractions the spray formula is written in."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, ClassVar, Optional, Sequence, Union

import numpy as np

from finslerhub.constants import AlphaKind, BetaKind
from finslerhub.error import DegenerateDirection, DomainError, SpecMismatchError

logger = logging.getLogger(__name__)

FD_STEP = 1e-5
DOMAIN_MARGIN = 1e-9

MatrixField = Callable[[np.ndarray], np.ndarray]
CovectorField = Callable[[np.ndarray], np.ndarray]


def _rho2(mu: float, x: np.ndarray) -> float:
    rho2 = 1.0 + mu * float(np.dot(x, x))
    if rho2 <= 0:
        raise DomainError(f"1 + μ|x|² = {rho2} ≤ 0 at x={x}")
    return rho2


def ball_radius(mu: float) -> float:
    """r_μ: the metrics over α_μ live on the ball |x| < r_μ"""
    return 1.0 / math.sqrt(-mu) if mu < 0 else math.inf


def central_jacobian(field: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float):
    """∂field/∂x^k stacked along a new last axis"""
    columns = []
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = h
        columns.append((field(x + e) - field(x - e)) / (2.0 * h))
    return np.stack(columns, axis=-1)


def levi_civita(a_inv: np.ndarray, da: np.ndarray) -> np.ndarray:
    """Γ[k, i, j] = ½ a^{kl}(∂_i a_lj + ∂_j a_li − ∂_l a_ij), with da[i, j, k] = ∂_k a_ij"""
    lowered = da.transpose(0, 2, 1) + da - da.transpose(2, 0, 1)
    return 0.5 * np.einsum("kl,lij->kij", a_inv, lowered)


@dataclass(frozen=True)
class ConstCurvatureAlpha:
    """α_μ = √((1+μ|x|²)|y|² − μ⟨x,y⟩²)/(1+μ|x|²), sectional curvature μ"""

    kind: ClassVar[AlphaKind] = AlphaKind.CONST_CURVATURE
    mu: float = 0.0

    def check_domain(self, x: np.ndarray, margin: float = DOMAIN_MARGIN):
        _rho2(self.mu, x)
        if self.mu < 0 and np.linalg.norm(x) >= ball_radius(self.mu) - margin:
            raise DomainError(f"|x| = {np.linalg.norm(x)} outside B(r_μ), μ={self.mu}")

    def contains(self, x: np.ndarray) -> bool:
        try:
            self.check_domain(x)
        except DomainError:
            return False
        return True

    def matrix(self, x):
        rho2 = _rho2(self.mu, x)
        n = len(x)
        return np.eye(n) / rho2 - self.mu * np.outer(x, x) / rho2 ** 2

    def inverse(self, x):
        rho2 = _rho2(self.mu, x)
        return rho2 * (np.eye(len(x)) + self.mu * np.outer(x, x))

    def derivative(self, x):
        mu = self.mu
        rho2 = _rho2(mu, x)
        eye = np.eye(len(x))
        return (
            -2.0 * mu * np.einsum("ij,k->ijk", eye, x) / rho2 ** 2
            - mu
            * (np.einsum("ik,j->ijk", eye, x) + np.einsum("i,jk->ijk", x, eye))
            / rho2 ** 2
            + 4.0 * mu * mu * np.einsum("i,j,k->ijk", x, x, x) / rho2 ** 3
        )

    def christoffel(self, x):
        # Γ^k_ij = −μ(x^i δ^k_j + x^j δ^k_i)/(1+μ|x|²)
        rho2 = _rho2(self.mu, x)
        eye = np.eye(len(x))
        return (
            -self.mu
            * (np.einsum("i,kj->kij", x, eye) + np.einsum("j,ki->kij", x, eye))
            / rho2
        )


@dataclass(frozen=True)
class ExplicitAlpha:
    """α given as a field of symmetric matrices a_ij(x); derivatives by central
    differences"""

    kind: ClassVar[AlphaKind] = AlphaKind.EXPLICIT
    a: MatrixField = None
    h: float = FD_STEP

    def check_domain(self, x, margin: float = DOMAIN_MARGIN):
        try:
            np.linalg.cholesky(self.a(x))
        except np.linalg.LinAlgError:
            raise DomainError(f"a_ij is not positive definite at x={x}")

    def contains(self, x) -> bool:
        try:
            self.check_domain(x)
        except DomainError:
            return False
        return True

    def matrix(self, x):
        return np.asarray(self.a(x), dtype=float)

    def inverse(self, x):
        return np.linalg.inv(self.matrix(x))

    def derivative(self, x):
        return central_jacobian(self.matrix, x, self.h)

    def christoffel(self, x):
        return levi_civita(self.inverse(x), self.derivative(x))


@dataclass(frozen=True)
class ClosedConformalBeta:
    """β = [λ⟨x,y⟩ + (1+μ|x|²)⟨a,y⟩ − μ⟨a,x⟩⟨x,y⟩]/(1+μ|x|²)^{3/2}: closed and
    conformal with respect to α_μ"""

    kind: ClassVar[BetaKind] = BetaKind.CONFORMAL
    mu: float = 0.0
    lam: float = 1.0
    a: Sequence[float] = None

    closed_conformal: ClassVar[bool] = True

    def _a(self, x):
        if self.a is None:
            return np.zeros(len(x))
        return np.asarray(self.a, dtype=float)

    def covector(self, x):
        a = self._a(x)
        rho2 = _rho2(self.mu, x)
        rho = math.sqrt(rho2)
        ax = float(np.dot(a, x))
        return self.lam * x / rho ** 3 + a / rho - self.mu * ax * x / rho ** 3

    def derivative(self, x):
        """db[i, j] = ∂b_i/∂x^j"""
        mu, lam = self.mu, self.lam
        a = self._a(x)
        rho = math.sqrt(_rho2(mu, x))
        ax = float(np.dot(a, x))
        eye = np.eye(len(x))
        xx = np.outer(x, x)
        return (
            lam * eye / rho ** 3
            - 3.0 * mu * lam * xx / rho ** 5
            - mu * np.outer(a, x) / rho ** 3
            - mu * ax * eye / rho ** 3
            - mu * np.outer(x, a) / rho ** 3
            + 3.0 * mu * mu * ax * xx / rho ** 5
        )

    def conformal_factor(self, x) -> float:
        """c(x) = (λ − μ⟨a,x⟩)/√(1+μ|x|²), with b_{i|j} = c·a_ij"""
        a = self._a(x)
        return (self.lam - self.mu * float(np.dot(a, x))) / math.sqrt(_rho2(self.mu, x))


@dataclass(frozen=True)
class ExplicitBeta:
    """β given as a covector field b_i(x). Set `conformal` only for fields known
    to be closed with b_{i|j} = c(x)·a_ij."""

    kind: ClassVar[BetaKind] = BetaKind.EXPLICIT
    b: CovectorField = None
    conformal: bool = False
    h: float = FD_STEP

    @property
    def closed_conformal(self) -> bool:
        return self.conformal

    def covector(self, x):
        return np.asarray(self.b(x), dtype=float)

    def derivative(self, x):
        return central_jacobian(self.covector, x, self.h)


def affine_beta(c: Sequence[float], m: Sequence[Sequence[float]]) -> ExplicitBeta:
    """b_i(x) = c_i + m_ij x^j"""
    c = np.asarray(c, dtype=float)
    m = np.asarray(m, dtype=float)
    if c.ndim != 1 or m.shape != (len(c), len(c)):
        raise SpecMismatchError("affine β needs c of length n and m of shape n×n")
    return ExplicitBeta(b=lambda x: c + m @ x)


Alpha = Union[ConstCurvatureAlpha, ExplicitAlpha]
Beta = Union[ClosedConformalBeta, ExplicitBeta]


@dataclass(frozen=True)
class AlphaBetaSpec:
    dim: int
    alpha: Alpha
    beta: Beta

    def __post_init__(self):
        if self.dim < 2:
            raise SpecMismatchError(f"dimension must be at least 2, got {self.dim}")
        if isinstance(self.beta, ClosedConformalBeta):
            if not isinstance(self.alpha, ConstCurvatureAlpha):
                raise SpecMismatchError("the conformal β needs a constant curvature α")
            if self.beta.mu != self.alpha.mu:
                raise SpecMismatchError(
                    f"β built for μ={self.beta.mu} paired with α of μ={self.alpha.mu}"
                )
            if self.beta.a is not None and len(self.beta.a) != self.dim:
                raise SpecMismatchError(
                    f"vector a has length {len(self.beta.a)}, expected {self.dim}"
                )

    def point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise SpecMismatchError(f"point {x} is not in dimension {self.dim}")
        self.alpha.check_domain(x)
        return x

    def contains(self, x) -> bool:
        return self.alpha.contains(np.asarray(x, dtype=float))


@dataclass
class AlphaBetaJet:
    """
    Riemannian data at one point x and, for the y-dependent contractions, one
    direction y

    Parameters
    ----------
    a_ij, a_inv, da_ijk :
        α's matrix, its inverse and da_ijk[i, j, k] = ∂a_ij/∂x^k
    Gamma :
        Gamma[k, i, j] = Γ^k_ij
    b_i, b_up, b2 :
        β's covector, the raised vector b^i and b² = ‖β‖²_α
    bcov_ij :
        b_{i|j}
    r_ij, s_ij :
        symmetric and antisymmetric parts of b_{i|j}
    """

    a_ij: np.ndarray
    a_inv: np.ndarray
    da_ijk: np.ndarray
    Gamma: np.ndarray
    b_i: np.ndarray
    b_up: np.ndarray
    b2: float
    bcov_ij: np.ndarray
    r_ij: np.ndarray
    s_ij: np.ndarray
    r_i: np.ndarray
    s_i: np.ndarray
    r_up_i: np.ndarray
    s_up_i: np.ndarray
    r: float
    r0: float = 0.0
    s0: float = 0.0
    r00: float = 0.0
    s_up_i_0: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None

    @property
    def dim(self):
        return len(self.b_i)


def alpha_mu_at(mu: float, x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rho2 = _rho2(mu, x)
    xy = float(np.dot(x, y))
    radicand = rho2 * float(np.dot(y, y)) - mu * xy * xy
    return math.sqrt(max(radicand, 0.0)) / rho2


def beta_thm3_at(mu: float, lam: float, a, x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = np.zeros_like(x) if a is None else np.asarray(a, dtype=float)
    rho2 = _rho2(mu, x)
    xy = float(np.dot(x, y))
    return (
        lam * xy + rho2 * float(np.dot(a, y)) - mu * float(np.dot(a, x)) * xy
    ) / rho2 ** 1.5


def christoffel(spec: AlphaBetaSpec, x) -> np.ndarray:
    """Γ^k_ij of α at x, indexed Gamma[k, i, j]"""
    return spec.alpha.christoffel(spec.point(x))


def beta_covariant_jet(
    spec: AlphaBetaSpec, x, y=None, b_up: Optional[np.ndarray] = None
) -> AlphaBetaJet:
    """b_{i|j} = ∂b_i/∂x^j − b_k Γ^k_ij and the contractions built from it.
    The y-dependent fields are only filled when y is given."""
    x = spec.point(x)
    alpha, beta = spec.alpha, spec.beta

    a = alpha.matrix(x)
    a_inv = alpha.inverse(x)
    da = alpha.derivative(x)
    gamma = alpha.christoffel(x)

    b = beta.covector(x)
    if b_up is None:
        b_up = a_inv @ b
    b2 = float(b @ b_up)

    bcov = beta.derivative(x) - np.einsum("k,kij->ij", b, gamma)
    r_ij = 0.5 * (bcov + bcov.T)
    s_ij = 0.5 * (bcov - bcov.T)
    r_i = b_up @ r_ij
    s_i = b_up @ s_ij

    jet = AlphaBetaJet(
        a_ij=a,
        a_inv=a_inv,
        da_ijk=da,
        Gamma=gamma,
        b_i=b,
        b_up=b_up,
        b2=b2,
        bcov_ij=bcov,
        r_ij=r_ij,
        s_ij=s_ij,
        r_i=r_i,
        s_i=s_i,
        r_up_i=a_inv @ r_i,
        s_up_i=a_inv @ s_i,
        r=float(b_up @ r_i),
    )

    if y is not None:
        y = np.asarray(y, dtype=float)
        if not np.any(y):
            raise DegenerateDirection("y must be nonzero")
        jet.y = y
        jet.r0 = float(r_i @ y)
        jet.s0 = float(s_i @ y)
        jet.r00 = float(y @ r_ij @ y)
        jet.s_up_i_0 = a_inv @ (s_ij @ y)

    return jet


def spray_riemann(spec: AlphaBetaSpec, x, y) -> np.ndarray:
    """G^i_α = ½ Γ^i_jk y^j y^k"""
    y = np.asarray(y, dtype=float)
    gamma = christoffel(spec, x)
    return 0.5 * np.einsum("ijk,j,k->i", gamma, y, y)


def projective_theta(spec: AlphaBetaSpec, x, y) -> float:
    """θ with G_α = θ·y. Exact for constant curvature α, least squares otherwise."""
    y = np.asarray(y, dtype=float)
    if isinstance(spec.alpha, ConstCurvatureAlpha):
        x = spec.point(x)
        mu = spec.alpha.mu
        return -mu * float(np.dot(x, y)) / _rho2(mu, x)
    g_alpha = spray_riemann(spec, x, y)
    return float(g_alpha @ y) / float(y @ y)


def conformal_factor(spec: AlphaBetaSpec, x) -> float:
    """c(x) for a closed conformal β. Explicit fields recover it as tr(a⁻¹ r)/n."""
    x = spec.point(x)
    if isinstance(spec.beta, ClosedConformalBeta):
        return spec.beta.conformal_factor(x)
    jet = beta_covariant_jet(spec, x)
    return float(np.trace(jet.a_inv @ jet.r_ij)) / spec.dim
