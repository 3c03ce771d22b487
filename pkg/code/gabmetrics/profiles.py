"""One-variable building blocks of the f, g solution family.

An FProfile is f(t) together with f′, f″, the open interval of t it is defined
on and, for the shipped profiles, the closed-form antiderivative

    I(b², s) = ∫₀^s f′(b² − σ²) dσ.

A GProfile is the free coefficient g(b²) of the linear term g(b²)·s.
"""
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np

RealFn = Callable[[float], float]
Antiderivative = Callable[[float, float], float]

DEFAULT_QUADRATURE_NODES = 32


@dataclass(frozen=True)
class FProfile:
    name: str
    f: RealFn
    df: RealFn
    d2f: RealFn
    t_min: float = -math.inf
    t_max: float = math.inf
    integral: Optional[Antiderivative] = None

    def contains(self, t: float) -> bool:
        return self.t_min < t < self.t_max

    @property
    def b_o(self) -> float:
        """t = b² − s² ranges over [0, b²], so only the upper end of f's interval
        restricts b"""
        if self.t_min >= 0:
            return 0.0
        return math.sqrt(self.t_max) if math.isfinite(self.t_max) else math.inf


@dataclass(frozen=True)
class GProfile:
    name: str
    g: RealFn
    dg: RealFn
    b2_max: float = math.inf

    @property
    def b_o(self) -> float:
        return math.sqrt(self.b2_max) if math.isfinite(self.b2_max) else math.inf


def gauss_legendre_integral(
    fn: RealFn, s: float, nodes: int = DEFAULT_QUADRATURE_NODES
) -> float:
    """∫₀^s fn(σ) dσ by a fixed-order Gauss–Legendre rule"""
    if s == 0.0:
        return 0.0
    x, w = _legendre(nodes)
    sigma = 0.5 * s * (x + 1.0)
    return 0.5 * s * float(np.dot(w, [fn(v) for v in sigma]))


_LEGENDRE_CACHE: Dict[int, tuple] = {}


def _legendre(nodes: int):
    if nodes not in _LEGENDRE_CACHE:
        _LEGENDRE_CACHE[nodes] = np.polynomial.legendre.leggauss(nodes)
    return _LEGENDRE_CACHE[nodes]


def _inv_sqrt_one_minus_t_integral(b2: float, s: float) -> float:
    c = 1.0 - b2
    return s / (2.0 * c * math.sqrt(c + s * s))


def _sqrt_one_minus_t_integral(b2: float, s: float) -> float:
    return -0.5 * math.asinh(s / math.sqrt(1.0 - b2))


def _sqrt_one_plus_t_integral(b2: float, s: float) -> float:
    return 0.5 * math.asin(s / math.sqrt(1.0 + b2))


def _log_two_plus_t_integral(b2: float, s: float) -> float:
    k = math.sqrt(2.0 + b2)
    return math.atanh(s / k) / k


def _log_two_minus_t_integral(b2: float, s: float) -> float:
    m = math.sqrt(2.0 - b2)
    return -math.atan(s / m) / m


def _one_plus_arctan_t_integral(b2: float, s: float) -> float:
    # 1 + (b² − σ²)² = (σ² + κσ + q)(σ² − κσ + q)
    q = math.sqrt(1.0 + b2 * b2)
    kappa = math.sqrt(2.0 * q + 2.0 * b2)
    d = math.sqrt(0.5 * (q - b2))
    log_part = math.log((s * s + kappa * s + q) / (s * s - kappa * s + q))
    atan_part = math.atan((2.0 * s + kappa) / (2.0 * d)) + math.atan(
        (2.0 * s - kappa) / (2.0 * d)
    )
    return (log_part / (2.0 * kappa) + atan_part / (2.0 * d)) / (2.0 * q)


F_PROFILES: Dict[str, FProfile] = {
    profile.name: profile
    for profile in (
        FProfile(
            "inv_sqrt_one_minus_t",
            f=lambda t: (1.0 - t) ** -0.5,
            df=lambda t: 0.5 * (1.0 - t) ** -1.5,
            d2f=lambda t: 0.75 * (1.0 - t) ** -2.5,
            t_max=1.0,
            integral=_inv_sqrt_one_minus_t_integral,
        ),
        FProfile(
            "one_plus_t",
            f=lambda t: 1.0 + t,
            df=lambda t: 1.0,
            d2f=lambda t: 0.0,
            integral=lambda b2, s: s,
        ),
        FProfile(
            "sqrt_one_minus_t",
            f=lambda t: math.sqrt(1.0 - t),
            df=lambda t: -0.5 * (1.0 - t) ** -0.5,
            d2f=lambda t: -0.25 * (1.0 - t) ** -1.5,
            t_max=1.0,
            integral=_sqrt_one_minus_t_integral,
        ),
        FProfile(
            "sqrt_one_plus_t",
            f=lambda t: math.sqrt(1.0 + t),
            df=lambda t: 0.5 * (1.0 + t) ** -0.5,
            d2f=lambda t: -0.25 * (1.0 + t) ** -1.5,
            t_min=-1.0,
            integral=_sqrt_one_plus_t_integral,
        ),
        FProfile(
            "log_two_plus_t",
            f=lambda t: math.log(2.0 + t),
            df=lambda t: 1.0 / (2.0 + t),
            d2f=lambda t: -1.0 / (2.0 + t) ** 2,
            t_min=-2.0,
            integral=_log_two_plus_t_integral,
        ),
        FProfile(
            "log_two_minus_t",
            f=lambda t: math.log(2.0 - t),
            df=lambda t: -1.0 / (2.0 - t),
            d2f=lambda t: -1.0 / (2.0 - t) ** 2,
            t_max=2.0,
            integral=_log_two_minus_t_integral,
        ),
        FProfile(
            "one_plus_arctan_t",
            f=lambda t: 1.0 + math.atan(t),
            df=lambda t: 1.0 / (1.0 + t * t),
            d2f=lambda t: -2.0 * t / (1.0 + t * t) ** 2,
            integral=_one_plus_arctan_t_integral,
        ),
    )
}

G_PROFILES: Dict[str, GProfile] = {
    profile.name: profile
    for profile in (
        GProfile("zero", g=lambda b2: 0.0, dg=lambda b2: 0.0),
        # Randers metrics in navigation form
        GProfile(
            "randers_navigation",
            g=lambda b2: -1.0 / (1.0 - b2),
            dg=lambda b2: -1.0 / (1.0 - b2) ** 2,
            b2_max=1.0,
        ),
        GProfile(
            "funk",
            g=lambda b2: 1.0 / (1.0 - b2),
            dg=lambda b2: 1.0 / (1.0 - b2) ** 2,
            b2_max=1.0,
        ),
        # with f = 1 + t this gives (√(1+b²) + s)²
        GProfile(
            "berwald",
            g=lambda b2: 2.0 * math.sqrt(1.0 + b2),
            dg=lambda b2: 1.0 / math.sqrt(1.0 + b2),
        ),
    )
}


def get_f_profile(name: str) -> FProfile:
    try:
        return F_PROFILES[name]
    except KeyError:
        raise ValueError(f"Unknown f profile {name}")


def get_g_profile(name: str) -> GProfile:
    try:
        return G_PROFILES[name]
    except KeyError:
        raise ValueError(f"Unknown g profile {name}")


def constant_g(value: float) -> GProfile:
    """g(b²) ≡ value"""
    return GProfile(f"constant_{value:g}", g=lambda b2: value, dg=lambda b2: 0.0)
