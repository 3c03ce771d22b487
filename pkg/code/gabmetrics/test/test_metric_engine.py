import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finslerhub.error import DegenerateDirection, SingularTensor
from gabmetrics.conftest import conformal_spec, random_points, safe_scale, shipped_families
from gabmetrics.metric_engine import (
    _check_invertible,
    adapted_basis,
    det_g,
    eval_F,
    finsler_validity,
    fundamental_tensor,
    inverse_g,
    is_positive_definite,
    metric_point,
    random_block_orthogonal,
    rotation_invariance_check,
)
from gabmetrics.phi_families import BryantPhi, ConstantPhi, RandersPhi, homotopy

FAMILIES = shipped_families()
MUS = [-0.5, 0.0, 0.7]
FULL_SWEEP = pytest.param(100, marks=[pytest.mark.slow, pytest.mark.acceptance])
SAMPLE_COUNTS = [5, FULL_SWEEP]


def fd_hessian(spec, x, y, h=1e-4):
    """½∂²F²/∂y∂y by central differences"""
    n = len(y)
    eye = np.eye(n)

    def half_F2(yy):
        return 0.5 * eval_F(spec, x, yy) ** 2

    hessian = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            ei, ej = h * eye[i], h * eye[j]
            hessian[i, j] = (
                half_F2(y + ei + ej)
                - half_F2(y + ei - ej)
                - half_F2(y - ei + ej)
                + half_F2(y - ei - ej)
            ) / (4 * h * h)
    return hessian


@pytest.mark.parametrize("phi", FAMILIES, ids=lambda f: f.label)
@pytest.mark.parametrize("mu", MUS)
@pytest.mark.parametrize("dim", [2, 3])
@pytest.mark.parametrize("count", SAMPLE_COUNTS)
def test_fundamental_tensor(phi, mu, dim, count, rng):
    spec = conformal_spec(phi, mu=mu, dim=dim)
    for x, y in random_points(spec, rng, count, safe_scale(phi, mu)):
        g = fundamental_tensor(spec, x, y)
        expected = fd_hessian(spec, x, y)
        scale = np.linalg.norm(g)
        assert np.linalg.norm(g - expected) / scale < 1e-5

        assert det_g(spec, x, y) == pytest.approx(np.linalg.det(g), rel=1e-10)
        np.testing.assert_allclose(inverse_g(spec, x, y) @ g, np.eye(dim), atol=1e-10)
        assert is_positive_definite(g)


@pytest.mark.parametrize("phi", FAMILIES, ids=lambda f: f.label)
@pytest.mark.parametrize("mu", MUS)
@pytest.mark.parametrize("dim", [2, 3])
def test_homogeneity_and_euler_identity(phi, mu, dim, rng):
    spec = conformal_spec(phi, mu=mu, dim=dim)
    for x, y in random_points(spec, rng, 5, safe_scale(phi, mu)):
        g = fundamental_tensor(spec, x, y)
        for lam in (0.5, 2.0):
            np.testing.assert_allclose(
                fundamental_tensor(spec, x, lam * y), g, rtol=1e-12, atol=1e-12
            )
            assert eval_F(spec, x, lam * y) == pytest.approx(lam * eval_F(spec, x, y))
        assert y @ g @ y == pytest.approx(eval_F(spec, x, y) ** 2, rel=1e-12)


def test_fundamental_tensor_riemannian():
    spec = conformal_spec(ConstantPhi(), mu=0.5, dim=3)
    x = np.array([0.1, 0.2, 0.3])
    y = np.array([1.0, 0.0, -1.0])
    np.testing.assert_allclose(
        fundamental_tensor(spec, x, y), spec.ab.alpha.matrix(x), atol=1e-15
    )


def test_zero_direction():
    spec = conformal_spec(RandersPhi())
    with pytest.raises(DegenerateDirection):
        metric_point(spec, [0.1, 0.1], [0.0, 0.0])


def test_s_clamped_to_b():
    spec = conformal_spec(RandersPhi(), mu=0.5)
    x = np.array([0.3, 0.2])
    pt = metric_point(spec, x, [1.0, 0.0])
    along_b = metric_point(spec, x, pt.b_up)
    assert abs(along_b.s) <= math.sqrt(along_b.b2)
    assert along_b.s == pytest.approx(math.sqrt(along_b.b2), rel=1e-12)


@pytest.mark.parametrize(
    "phi, d1, d2, dim, quantity",
    [
        (0.0, 1.0, 1.0, 2, "phi"),
        (1.0, 1.0, -0.1, 2, "ineq2"),
        (1.0, -0.1, 1.0, 3, "ineq1"),
    ],
)
def test_singular_tensor(phi, d1, d2, dim, quantity):
    with pytest.raises(SingularTensor) as err:
        _check_invertible(phi, d1, d2, dim)
    assert err.value.quantity == quantity


def test_negative_d1_allowed_in_dim_two():
    _check_invertible(1.0, -0.1, 1.0, 2)


def test_validity_constant():
    report = finsler_validity(ConstantPhi(), dim=2, b_max=10.0, grid=21)
    assert report.valid
    assert report.first_failure_b is None
    assert report.min_phi == 1.0


def test_validity_randers_edge():
    assert finsler_validity(RandersPhi(), dim=3, b_max=0.99, grid=51).valid
    report = finsler_validity(RandersPhi(), dim=3, b_max=1.0, grid=51)
    assert not report.valid
    assert report.first_failure_b == 1.0
    assert report.domain_failures == 51


@pytest.mark.slow
def test_bryant_bound_is_bracketed():
    p = 0.9 * math.pi
    family = BryantPhi(p=p)
    report = finsler_validity(family, dim=2, b_max=1.2, grid=201)
    assert not report.valid
    assert report.first_failure_b == pytest.approx(family.b_o, abs=0.02)
    assert report.first_failure_b > family.b_o
    assert report.min_ineq2 < 0


@pytest.mark.slow
def test_bryant_regular_at_right_angle():
    report = finsler_validity(BryantPhi(p=math.pi / 2), dim=2, b_max=5.0, grid=101)
    assert report.valid
    assert report.min_ineq2 > 0


@pytest.mark.parametrize("mu", MUS)
def test_adapted_basis(mu):
    a = np.array([0.2, -0.1, 0.4])
    spec = conformal_spec(BryantPhi(p=0.5), mu=mu, dim=3, lam=0.8, a=a)
    x = np.array([0.1, 0.2, -0.2])
    basis = adapted_basis(spec, x)
    alpha = spec.ab.alpha.matrix(x)
    b = spec.ab.beta.covector(x)

    np.testing.assert_allclose(basis.T @ alpha @ basis, np.eye(3), atol=1e-12)
    components = basis.T @ b
    np.testing.assert_allclose(components[:2], 0.0, atol=1e-12)
    assert components[2] > 0


def test_block_orthogonal(rng):
    for n in (2, 3, 4):
        block = random_block_orthogonal(n, rng)
        np.testing.assert_allclose(block @ block.T, np.eye(n), atol=1e-14)
        assert block[n - 1, n - 1] == 1.0


@pytest.mark.parametrize(
    "phi", [BryantPhi(p=0.5), RandersPhi(), ConstantPhi()], ids=lambda f: f.label
)
def test_rotation_invariance(phi):
    spec = conformal_spec(phi, mu=0.7, dim=3, a=[0.1, 0.0, -0.2])
    assert rotation_invariance_check(spec, [0.1, 0.2, 0.1], trials=100) < 1e-10


@settings(deadline=None)
@given(st.floats(min_value=0.1, max_value=10.0))
def test_positive_homogeneity(scale):
    spec = conformal_spec(BryantPhi(p=1.0), mu=-0.5)
    x = np.array([0.2, 0.1])
    y = np.array([0.3, -0.7])
    assert eval_F(spec, x, scale * y) == pytest.approx(scale * eval_F(spec, x, y))


@pytest.mark.parametrize(
    "base", [RandersPhi(), BryantPhi(p=math.pi / 4)], ids=lambda f: f.label
)
@pytest.mark.parametrize("t", [0.0, 0.3, 0.7, 1.0])
def test_homotopy_stays_valid(base, t):
    # φ, φ − sφ₂ and φ − sφ₂ + (b² − s²)φ₂₂ are linear in φ
    report = finsler_validity(homotopy(base, t), dim=2, b_max=0.9, grid=41)
    assert report.valid
