from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import ClassVar, Dict, Optional

import numpy as np

from finslerhub.constants import PhiKind
from finslerhub.error import BranchError, DomainError
from gabmetrics.profiles import (
    DEFAULT_QUADRATURE_NODES,
    FProfile,
    GProfile,
    gauss_legendre_integral,
    get_g_profile,
)

logger = logging.getLogger(__name__)

# s² may exceed b² by round-off when s = ±b was produced by a square root
_S2_SLACK = 4 * np.finfo(float).eps

FD_STEP = 1e-5


@dataclass(frozen=True)
class PhiJet:
    """
    Value and partial derivatives of φ(b², s) at one point

    Parameters
    ----------
    phi :
        φ
    phi1 :
        ∂φ/∂b²
    phi2 :
        ∂φ/∂s
    phi12 :
        ∂²φ/∂b²∂s
    phi22 :
        ∂²φ/∂s²
    """

    phi: float
    phi1: float = 0.0
    phi2: float = 0.0
    phi12: float = 0.0
    phi22: float = 0.0

    def as_tuple(self):
        return self.phi, self.phi1, self.phi2, self.phi12, self.phi22


@dataclass(frozen=True)
class BryantJet:
    """Complex jet (Φ, Φ₁, Φ₂, Φ₁₂, Φ₂₂) of Φ = 1/(√(e^{ip}+b²−s²) + is)"""

    Phi: complex
    Phi1: complex
    Phi2: complex
    Phi12: complex
    Phi22: complex

    @property
    def real(self) -> PhiJet:
        return PhiJet(
            self.Phi.real,
            self.Phi1.real,
            self.Phi2.real,
            self.Phi12.real,
            self.Phi22.real,
        )


@dataclass(frozen=True)
class PhiFamily:
    """Base class for the φ families. Subclasses implement `jet`, which may assume
    its arguments already passed the checks in `eval_jet`.

    Two bounds are kept apart: `domain_bound` is where the formula is defined,
    `b_o` is where the metric it generates stays regular. They only differ for
    families whose formula keeps making sense past b_o.
    """

    kind: ClassVar[PhiKind]

    @property
    def b_o(self) -> float:
        return math.inf

    @property
    def domain_bound(self) -> float:
        return self.b_o

    @property
    def label(self) -> str:
        return str(self.kind)

    def describe(self) -> Dict:
        return {"kind": str(self.kind)}

    def jet(self, b2: float, s: float) -> PhiJet:
        raise NotImplementedError


def eval_jet(family: PhiFamily, b2: float, s: float) -> PhiJet:
    """Evaluate φ and its first and mixed partials. Raises DomainError if
    s² > b² or b² lies past the family's domain bound."""
    if b2 < 0:
        raise DomainError(f"b² must be nonnegative, got {b2}")
    if s * s - b2 > _S2_SLACK * max(b2, 1.0):
        raise DomainError(f"|s| > b at b²={b2}, s={s}")
    bound = family.domain_bound
    if math.isfinite(bound) and b2 >= bound * bound:
        raise DomainError(f"b² = {b2} outside the domain of {family.label} (b < {bound})")
    return family.jet(b2, s)


@dataclass(frozen=True)
class ConstantPhi(PhiFamily):
    kind: ClassVar[PhiKind] = PhiKind.CONSTANT

    def jet(self, b2, s):
        return PhiJet(1.0)


@dataclass(frozen=True)
class RandersPhi(PhiFamily):
    """φ = 1 + s"""

    kind: ClassVar[PhiKind] = PhiKind.RANDERS

    @property
    def b_o(self):
        return 1.0

    def jet(self, b2, s):
        return PhiJet(1.0 + s, 0.0, 1.0, 0.0, 0.0)


@dataclass(frozen=True)
class BerwaldSquarePhi(PhiFamily):
    """φ = (√(1+b²) + s)²"""

    kind: ClassVar[PhiKind] = PhiKind.BERWALD_SQUARE

    def jet(self, b2, s):
        r = math.sqrt(1.0 + b2)
        return PhiJet((r + s) ** 2, (r + s) / r, 2.0 * (r + s), 1.0 / r, 2.0)


@dataclass(frozen=True)
class ClassicalSquarePhi(PhiFamily):
    """φ = (1 + s)², depends on s only"""

    kind: ClassVar[PhiKind] = PhiKind.CLASSICAL_SQUARE

    @property
    def b_o(self):
        return 1.0

    def jet(self, b2, s):
        return PhiJet((1.0 + s) ** 2, 0.0, 2.0 * (1.0 + s), 0.0, 2.0)


def bryant_b_o(p: float) -> float:
    """Regularity bound of the Bryant family"""
    if abs(p) >= math.pi:
        raise DomainError(f"Bryant parameter must satisfy |p| < π, got {p}")
    if abs(p) <= math.pi / 2:
        return math.inf
    return math.sqrt(0.5 / math.cos(2.0 * math.pi / 3.0 - abs(p) / 3.0))


def bryant_Phi(p: float, b2: float, s: float) -> BryantJet:
    if abs(p) >= math.pi:
        raise DomainError(f"Bryant parameter must satisfy |p| < π, got {p}")
    if s * s - b2 > _S2_SLACK * max(b2, 1.0):
        raise DomainError(f"|s| > b at b²={b2}, s={s}")

    z = cmath.exp(1j * p) + (b2 - s * s)
    if z.imag == 0.0 and z.real <= 0.0:
        raise BranchError(f"e^(ip)+b²-s² = {z} is on the branch cut")

    # principal branch, √1 = 1
    w = cmath.sqrt(z)
    Phi = 1.0 / (w + 1j * s)
    sw = s / w - 1j
    Phi1 = -Phi * Phi / (2.0 * w)
    Phi2 = Phi * Phi * sw
    Phi12 = 2.0 * Phi * Phi1 * sw - s * Phi * Phi / (2.0 * w ** 3)
    Phi22 = 2.0 * Phi * Phi2 * sw + Phi * Phi * (1.0 / w + s * s / w ** 3)
    return BryantJet(Phi, Phi1, Phi2, Phi12, Phi22)


@dataclass(frozen=True)
class BryantPhi(PhiFamily):
    """φ = Re Φ. The formula is analytic in b for every |p| < π; regularity is
    lost past `bryant_b_o(p)`."""

    kind: ClassVar[PhiKind] = PhiKind.BRYANT
    p: float = 0.0

    def __post_init__(self):
        if abs(self.p) >= math.pi:
            raise DomainError(f"Bryant parameter must satisfy |p| < π, got {self.p}")

    @property
    def b_o(self):
        return bryant_b_o(self.p)

    @property
    def domain_bound(self):
        return math.inf

    @property
    def label(self):
        return f"bryant(p={self.p:.17g})"

    def describe(self):
        return {"kind": str(self.kind), "p": self.p}

    def jet(self, b2, s):
        return bryant_Phi(self.p, b2, s).real


def lemma_c_phi(
    f: FProfile,
    g: GProfile,
    b2: float,
    s: float,
    nodes: int = DEFAULT_QUADRATURE_NODES,
) -> PhiJet:
    """φ = f(b²−s²) + 2s∫₀^s f′(b²−σ²)dσ + g(b²)s and its partials.

    The b²-derivative of the integral always goes through quadrature; the integral
    itself uses the profile's antiderivative when there is one.
    """
    t = max(b2 - s * s, 0.0)
    if not (f.contains(t) and f.contains(b2)):
        raise DomainError(f"b²={b2}, s={s} outside the domain of f = {f.name}")
    if b2 >= g.b2_max:
        raise DomainError(f"b²={b2} outside the domain of g = {g.name}")

    if f.integral is not None:
        integral = f.integral(b2, s)
    else:
        integral = gauss_legendre_integral(lambda sig: f.df(b2 - sig * sig), s, nodes)
    integral_1 = gauss_legendre_integral(lambda sig: f.d2f(b2 - sig * sig), s, nodes)

    ft, dft = f.f(t), f.df(t)
    gb, dgb = g.g(b2), g.dg(b2)
    return PhiJet(
        phi=ft + 2.0 * s * integral + gb * s,
        phi1=dft + 2.0 * s * integral_1 + dgb * s,
        phi2=2.0 * integral + gb,
        phi12=2.0 * integral_1 + dgb,
        phi22=2.0 * dft,
    )


@dataclass(frozen=True)
class LemmaCPhi(PhiFamily):
    kind: ClassVar[PhiKind] = PhiKind.LEMMA_C
    f: FProfile = None
    g: GProfile = None
    nodes: int = DEFAULT_QUADRATURE_NODES

    def __post_init__(self):
        if self.g is None:
            object.__setattr__(self, "g", get_g_profile("zero"))

    @property
    def b_o(self):
        return min(self.f.b_o, self.g.b_o)

    @property
    def label(self):
        return f"lemma_c(f={self.f.name}, g={self.g.name})"

    def describe(self):
        return {"kind": str(self.kind), "f": self.f.name, "g": self.g.name}

    def jet(self, b2, s):
        return lemma_c_phi(self.f, self.g, b2, s, self.nodes)


def _transformed_bound(base_bound: float, mu: float) -> float:
    bound = math.inf
    if mu < 0:
        bound = math.sqrt(-1.0 / mu)
    if math.isfinite(base_bound):
        c = base_bound * base_bound
        if 1.0 - mu * c > 0:
            bound = min(bound, math.sqrt(c / (1.0 - mu * c)))
    return bound


def mu_transform(base: PhiFamily, mu: float, b2: float, s: float) -> PhiJet:
    """Jet of T_μ(φ) = A·φ(B, S), by the chain rule through

    A = √(1+μ(b²−s²))/(1+μb²), B = b²/(1+μb²), S = s/(√(1+μb²)√(1+μ(b²−s²)))
    """
    u = 1.0 + mu * b2
    v = 1.0 + mu * (b2 - s * s)
    if u <= 0 or v <= 0:
        raise DomainError(f"T_μ undefined at μ={mu}, b²={b2}, s={s}")

    B = b2 / u
    S = s / math.sqrt(u * v)
    if S * S > B:
        S = math.copysign(math.sqrt(B), S)
    j = eval_jet(base, B, S)

    su, sv = math.sqrt(u), math.sqrt(v)
    A = sv / u
    A1 = 0.5 * mu / (sv * u) - mu * sv / u ** 2
    A2 = -mu * s / (sv * u)
    A12 = mu * mu * s * (0.5 * v ** -1.5 / u + 1.0 / (sv * u ** 2))
    A22 = -(mu / u) * (1.0 / sv + mu * s * s * v ** -1.5)
    B1 = 1.0 / u ** 2
    S1 = -0.5 * mu * s / (su * sv) * (1.0 / u + 1.0 / v)
    S2 = su * v ** -1.5
    S12 = 0.5 * mu / su * v ** -1.5 - 1.5 * mu * su * v ** -2.5
    S22 = 3.0 * mu * s * su * v ** -2.5

    # d/db² of φ(B(b²), S(b², s))
    phi_b = j.phi1 * B1 + j.phi2 * S1
    return PhiJet(
        phi=A * j.phi,
        phi1=A1 * j.phi + A * phi_b,
        phi2=A2 * j.phi + A * j.phi2 * S2,
        phi12=A12 * j.phi
        + A2 * phi_b
        + A1 * j.phi2 * S2
        + A * ((j.phi12 * B1 + j.phi22 * S1) * S2 + j.phi2 * S12),
        phi22=A22 * j.phi
        + 2.0 * A2 * j.phi2 * S2
        + A * (j.phi22 * S2 * S2 + j.phi2 * S22),
    )


@dataclass(frozen=True)
class MuTransformedPhi(PhiFamily):
    kind: ClassVar[PhiKind] = PhiKind.MU_TRANSFORMED
    base: PhiFamily = None
    mu: float = 0.0

    @property
    def b_o(self):
        return _transformed_bound(self.base.b_o, self.mu)

    @property
    def domain_bound(self):
        return _transformed_bound(self.base.domain_bound, self.mu)

    @property
    def label(self):
        return f"T[{self.mu:.17g}]({self.base.label})"

    def describe(self):
        return {"kind": str(self.kind), "mu": self.mu, "base": self.base.describe()}

    def jet(self, b2, s):
        return mu_transform(self.base, self.mu, b2, s)


@dataclass(frozen=True)
class HomotopyPhi(PhiFamily):
    """φ_t = 1 − t + tφ, joining the Riemannian φ ≡ 1 (t = 0) to φ (t = 1)"""

    kind: ClassVar[PhiKind] = PhiKind.HOMOTOPY
    base: PhiFamily = None
    t: float = 1.0

    @property
    def b_o(self):
        return self.base.b_o

    @property
    def domain_bound(self):
        return self.base.domain_bound

    @property
    def label(self):
        return f"homotopy[{self.t:g}]({self.base.label})"

    def describe(self):
        return {"kind": str(self.kind), "t": self.t, "base": self.base.describe()}

    def jet(self, b2, s):
        j = self.base.jet(b2, s)
        t = self.t
        return PhiJet(
            1.0 - t + t * j.phi, t * j.phi1, t * j.phi2, t * j.phi12, t * j.phi22
        )


def homotopy(phi: PhiFamily, t: float) -> HomotopyPhi:
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"homotopy parameter must be in [0, 1], got {t}")
    return HomotopyPhi(base=phi, t=t)


def fd_jet(
    family: PhiFamily, b2: float, s: float, h: float = FD_STEP, jet: Optional[PhiJet] = None
) -> PhiJet:
    """Central-difference estimate of the jet. phi1 and phi2 difference the value;
    phi12 and phi22 difference the analytic phi2, which keeps them clear of the
    h⁻² round-off floor."""
    if jet is None:
        jet = eval_jet(family, b2, s)

    def value(db2, ds):
        return eval_jet(family, b2 + db2, s + ds)

    plus_b, minus_b = value(h, 0.0), value(-h, 0.0)
    plus_s, minus_s = value(0.0, h), value(0.0, -h)
    return PhiJet(
        phi=jet.phi,
        phi1=(plus_b.phi - minus_b.phi) / (2 * h),
        phi2=(plus_s.phi - minus_s.phi) / (2 * h),
        phi12=(plus_b.phi2 - minus_b.phi2) / (2 * h),
        phi22=(plus_s.phi2 - minus_s.phi2) / (2 * h),
    )


def validity_quantities(jet: PhiJet, b2: float, s: float):
    """(φ, φ − sφ₂, φ − sφ₂ + (b² − s²)φ₂₂)"""
    d1 = jet.phi - s * jet.phi2
    d2 = d1 + (b2 - s * s) * jet.phi22
    return jet.phi, d1, d2
