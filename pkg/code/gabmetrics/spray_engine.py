from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from finslerhub.constants import SprayMethod
from finslerhub.error import PreconditionError, SingularTensor, StepTooLarge
from gabmetrics.metric_engine import MetricSpec, inverse_g, metric_point
from gabmetrics.phi_families import PhiJet, validity_quantities
from gabmetrics.riemann_data import (
    beta_covariant_jet,
    conformal_factor,
    projective_theta,
    spray_riemann,
)

logger = logging.getLogger(__name__)

FD_STEP = 1e-5
RICHARDSON_RTOL = 1e-3
PDE_PRECONDITION_TOL = 1e-6
# "projectively flat at this point" thresholds for the two error regimes
FLAT_TOL_CLOSED = 1e-8
FLAT_TOL_FD = 1e-6

_TINY = 1e-300


@dataclass(frozen=True)
class SprayTerms:
    Q: float
    R: float
    Theta: float
    Psi: float
    Pi: float
    Omega: float


@dataclass
class SprayResult:
    """
    Parameters
    ----------
    G :
        spray coefficients G^i
    P :
        projective factor, the least-squares fit of G = P·y
    residual :
        ‖G − P·y‖/‖G‖
    """

    x: np.ndarray
    y: np.ndarray
    G: np.ndarray
    method: SprayMethod
    P: Optional[float] = None
    residual: Optional[float] = None

    def __post_init__(self):
        if self.P is None:
            self.P, self.residual = projective_factor(self.G, self.y)

    def is_flat(self, tol: float) -> bool:
        return self.residual < tol

    def to_dict(self) -> Dict:
        return {
            "x": self.x.tolist(),
            "y": self.y.tolist(),
            "G": self.G.tolist(),
            "P": self.P,
            "residual": self.residual,
            "method": str(self.method),
        }


def spray_terms(jet: PhiJet, b2: float, s: float) -> SprayTerms:
    phi, d1, d2 = validity_quantities(jet, b2, s)
    for name, value in (("φ", phi), ("φ − sφ₂", d1), ("φ − sφ₂ + (b²−s²)φ₂₂", d2)):
        if abs(value) < _TINY:
            raise SingularTensor(f"{name} vanishes at b²={b2}, s={s}", quantity=name)

    Pi = (d1 * jet.phi12 - s * jet.phi1 * jet.phi22) / (d1 * d2)
    return SprayTerms(
        Q=jet.phi2 / d1,
        R=jet.phi1 / d1,
        Theta=(d1 * jet.phi2 - s * phi * jet.phi22) / (2.0 * phi * d2),
        Psi=jet.phi22 / (2.0 * d2),
        Pi=Pi,
        Omega=2.0 * jet.phi1 / phi - (s * phi + (b2 - s * s) * jet.phi2) / phi * Pi,
    )


def spray_closed(spec: MetricSpec, x, y) -> SprayResult:
    """G^i from G^i_α and the r/s contractions of β"""
    pt = metric_point(spec, x, y)
    ab = beta_covariant_jet(spec.ab, pt.x, pt.y, b_up=pt.b_up)
    t = spray_terms(pt.jet, pt.b2, pt.s)
    alpha = pt.alpha

    common = -2.0 * alpha * t.Q * ab.s0 + ab.r00 + 2.0 * alpha * alpha * t.R * ab.r
    rs0 = ab.r0 + ab.s0
    G = (
        spray_riemann(spec.ab, pt.x, pt.y)
        + alpha * t.Q * ab.s_up_i_0
        + (t.Theta * common + alpha * t.Omega * rs0) * pt.y / alpha
        + (t.Psi * common + alpha * t.Pi * rs0) * pt.b_up
        - alpha * alpha * t.R * (ab.r_up_i + ab.s_up_i)
    )
    return SprayResult(pt.x, pt.y, G, SprayMethod.CLOSED)


def _fd_spray(spec: MetricSpec, x: np.ndarray, y: np.ndarray, h: float) -> np.ndarray:
    def F2(xx, yy):
        return metric_point(spec, xx, yy).F ** 2

    n = spec.dim
    eye = np.eye(n)
    bracket = np.empty(n)
    for l in range(n):  # noqa: E741
        el = h * eye[l]
        # y^k ∂²F²/∂x^k∂y^l, differenced along y in x and along e_l in y
        mixed = (
            F2(x + h * y, y + el)
            - F2(x + h * y, y - el)
            - F2(x - h * y, y + el)
            + F2(x - h * y, y - el)
        ) / (4.0 * h * h)
        grad = (F2(x + el, y) - F2(x - el, y)) / (2.0 * h)
        bracket[l] = mixed - grad
    return 0.25 * inverse_g(spec, x, y) @ bracket


def spray_oracle_fd(
    spec: MetricSpec,
    x,
    y,
    h: float = FD_STEP,
    richardson_rtol: float = RICHARDSON_RTOL,
) -> np.ndarray:
    """G^i = ¼g^{il}{[F²]_{x^k y^l}y^k − [F²]_{x^l}} by central differences, checked
    against the same estimate at h/2"""
    x = spec.ab.point(x)
    y = np.asarray(y, dtype=float)
    coarse = _fd_spray(spec, x, y, h)
    fine = _fd_spray(spec, x, y, 0.5 * h)

    scale = max(np.linalg.norm(fine), float(y @ y))
    disagreement = np.linalg.norm(coarse - fine) / scale
    if disagreement > richardson_rtol:
        raise StepTooLarge(
            f"FD spray at x={x} changes by {disagreement:.3g} between h and h/2",
            disagreement=disagreement,
        )
    return fine


def spray_fd_result(
    spec: MetricSpec,
    x,
    y,
    h: float = FD_STEP,
    richardson_rtol: float = RICHARDSON_RTOL,
) -> SprayResult:
    x = spec.ab.point(x)
    y = np.asarray(y, dtype=float)
    G = spray_oracle_fd(spec, x, y, h, richardson_rtol)
    return SprayResult(x, y, G, SprayMethod.FD_ORACLE)


def spray_conformal_closed(
    spec: MetricSpec, x, y, pde_tol: float = PDE_PRECONDITION_TOL
) -> SprayResult:
    """G^i = {θ + cα(φ₂ + 2sφ₁)/(2φ)}·y^i, valid when β is closed and conformal
    and φ solves φ₂₂ = 2(φ₁ − sφ₁₂)"""
    if not spec.ab.beta.closed_conformal:
        raise PreconditionError(
            f"β of {spec.label} is not known to be closed and conformal"
        )
    pt = metric_point(spec, x, y)
    jet = pt.jet
    residual = abs(jet.phi22 - 2.0 * (jet.phi1 - pt.s * jet.phi12))
    if residual > pde_tol:
        raise PreconditionError(
            f"φ of {spec.label} misses the flatness equation by {residual:.3g} at "
            f"b²={pt.b2}, s={pt.s}"
        )

    theta = projective_theta(spec.ab, pt.x, pt.y)
    c = conformal_factor(spec.ab, pt.x)
    P = theta + c * pt.alpha * (jet.phi2 + 2.0 * pt.s * jet.phi1) / (2.0 * jet.phi)
    return SprayResult(pt.x, pt.y, P * pt.y, SprayMethod.CONFORMAL, P=P, residual=0.0)


def projective_factor(G, y):
    """P = ⟨G,y⟩/⟨y,y⟩ and the relative size of what G = P·y leaves over"""
    G = np.asarray(G, dtype=float)
    y = np.asarray(y, dtype=float)
    P = float(G @ y) / float(y @ y)
    residual = float(np.linalg.norm(G - P * y)) / max(float(np.linalg.norm(G)), _TINY)
    return P, residual


def compute_spray(
    spec: MetricSpec,
    x,
    y,
    method: SprayMethod,
    fd_step: float = FD_STEP,
    richardson_rtol: float = RICHARDSON_RTOL,
    pde_tol: float = PDE_PRECONDITION_TOL,
) -> SprayResult:
    if method == SprayMethod.CLOSED:
        return spray_closed(spec, x, y)
    elif method == SprayMethod.CONFORMAL:
        return spray_conformal_closed(spec, x, y, pde_tol)
    elif method == SprayMethod.FD_ORACLE:
        return spray_fd_result(spec, x, y, fd_step, richardson_rtol)
    else:
        raise ValueError(f"Unknown spray method {method}")


def spray_vector(spec: MetricSpec, x, y, method: SprayMethod) -> np.ndarray:
    """G alone, for integrators that don't need the projective fit"""
    if method == SprayMethod.FD_ORACLE:
        return spray_oracle_fd(spec, x, y)
    return compute_spray(spec, x, y, method).G


def bryant_projective_factor(spec: MetricSpec, x, y, p: float) -> float:
    """θ + c·Im[(√((e^{ip}+b²)α² − β²) − iβ)/(e^{ip}+b²)]"""
    pt = metric_point(spec, x, y)
    z = np.exp(1j * p) + pt.b2
    value = (np.sqrt(z * pt.alpha ** 2 - pt.beta ** 2) - 1j * pt.beta) / z
    theta = projective_theta(spec.ab, pt.x, pt.y)
    return theta + conformal_factor(spec.ab, pt.x) * float(value.imag)


def is_projectively_flat_at(
    result: SprayResult,
    tol_closed: float = FLAT_TOL_CLOSED,
    tol_fd: float = FLAT_TOL_FD,
) -> bool:
    """The FD oracle is held to the looser tolerance"""
    tol = tol_fd if result.method == SprayMethod.FD_ORACLE else tol_closed
    if not math.isfinite(result.residual):
        return False
    return result.is_flat(tol)
