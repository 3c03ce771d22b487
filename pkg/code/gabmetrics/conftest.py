from pathlib import Path

import numpy as np
import pytest

from finslerhub.config import Config
from gabmetrics.metric_engine import MetricSpec
from gabmetrics.metric_spec import berwald_preset, funk_preset
from gabmetrics.phi_families import (
    BerwaldSquarePhi,
    BryantPhi,
    ConstantPhi,
    LemmaCPhi,
    MuTransformedPhi,
    RandersPhi,
)
from gabmetrics.profiles import F_PROFILES, constant_g, get_f_profile, get_g_profile
from gabmetrics.riemann_data import (
    AlphaBetaSpec,
    ClosedConformalBeta,
    ConstCurvatureAlpha,
    affine_beta,
)


@pytest.fixture(scope="session")
def test_data_dir():
    return Path(__file__).parent / "test" / "data"


@pytest.fixture(scope="session")
def config():
    return Config()


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def shipped_families():
    """One instance of every φ family, each with a finite or infinite b_o"""
    return [
        ConstantPhi(),
        RandersPhi(),
        BerwaldSquarePhi(),
        BryantPhi(p=0.0),
        BryantPhi(p=np.pi / 4),
        BryantPhi(p=-np.pi / 2),
        LemmaCPhi(f=get_f_profile("inv_sqrt_one_minus_t"), g=get_g_profile("funk")),
        LemmaCPhi(f=get_f_profile("one_plus_arctan_t"), g=constant_g(0.3)),
        MuTransformedPhi(base=BerwaldSquarePhi(), mu=0.5),
    ]


def lemma_c_families():
    """All seven f profiles, each with a nonzero g"""
    return [LemmaCPhi(f=profile, g=constant_g(0.5)) for profile in F_PROFILES.values()]


def conformal_spec(phi, mu: float = 0.0, dim: int = 2, lam: float = 1.0, a=None):
    return MetricSpec(
        phi=phi,
        ab=AlphaBetaSpec(
            dim=dim,
            alpha=ConstCurvatureAlpha(mu=mu),
            beta=ClosedConformalBeta(mu=mu, lam=lam, a=a),
        ),
    )


def rotation_spec(k: float = 0.5):
    """Randers metric with β = k(−x₂, x₁) on flat α: not projectively flat"""
    return MetricSpec(
        phi=RandersPhi(),
        ab=AlphaBetaSpec(
            dim=2,
            alpha=ConstCurvatureAlpha(mu=0.0),
            beta=affine_beta([0.0, 0.0], [[0.0, -k], [k, 0.0]]),
        ),
    )


def safe_scale(phi, mu: float, lam: float = 1.0) -> float:
    """A radius r ≤ 0.4 where b² = λ²r²/(1+μr²) stays below ¼ of the regular range"""
    radius = 0.4
    if mu < 0:
        radius = min(radius, 0.5 / np.sqrt(-mu))
    if np.isfinite(phi.b_o):
        c = (0.5 * phi.b_o) ** 2
        if lam * lam - mu * c > 0:
            radius = min(radius, np.sqrt(c / (lam * lam - mu * c)))
    return radius


def random_points(spec: MetricSpec, rng: np.random.Generator, count: int, radius: float):
    """(x, y) pairs with |x| < radius and y a random unit vector"""
    points = []
    for _ in range(count):
        x = rng.standard_normal(spec.dim)
        x *= radius * rng.uniform() / np.linalg.norm(x)
        y = rng.standard_normal(spec.dim)
        points.append((x, y / np.linalg.norm(y)))
    return points


@pytest.fixture(scope="session")
def funk():
    return funk_preset(2)


@pytest.fixture(scope="session")
def berwald():
    return berwald_preset(2)
