import math

import numpy as np
import pytest

from gabmetrics.conftest import lemma_c_families
from gabmetrics.pde_lab import (
    TRANSFORM_COLUMNS,
    GroupLawReport,
    constant_transform_closed_form,
    default_b_max,
    equivalence_of_representations,
    interior_grid,
    pde_residual,
    pde_residual_classical,
    pde_sweep,
    transform_table,
    verify_group_laws,
    verify_solution_closure,
)
from gabmetrics.phi_families import (
    BerwaldSquarePhi,
    BryantPhi,
    ClassicalSquarePhi,
    ConstantPhi,
    RandersPhi,
)

SOLUTIONS = [
    ConstantPhi(),
    RandersPhi(),
    BerwaldSquarePhi(),
    BryantPhi(p=-math.pi / 2),
    BryantPhi(p=0.0),
    BryantPhi(p=math.pi / 4),
    BryantPhi(p=0.9 * math.pi),
] + lemma_c_families()
TRANSFORM_BASES = [BerwaldSquarePhi(), BryantPhi(p=math.pi / 4), RandersPhi()]
REPRESENTED = [BerwaldSquarePhi(), BryantPhi(p=1.0), ConstantPhi()]


@pytest.mark.parametrize("family", SOLUTIONS, ids=lambda f: f.label)
def test_solutions_satisfy_pde(family):
    report = pde_sweep(family, grid=41)
    assert report.passes(1e-8)
    assert report.skipped == 0
    assert report.argmax_node is not None


def test_classical_square_fails_pde():
    assert pde_residual_classical(0.25, 0.1) == 2.0
    report = pde_sweep(ClassicalSquarePhi(), grid=21)
    assert report.max_residual >= 0.1
    assert not report.passes(1e-8)


def test_pde_residual_of_constant():
    assert pde_residual(ConstantPhi(), 0.5, 0.2) == 0.0


def test_interior_grid():
    nodes = list(interior_grid(0.5, grid=11))
    assert len(nodes) == 10 * 11
    assert all(b2 > 0 and s * s < b2 for b2, s in nodes)
    assert max(b2 for b2, _ in nodes) == pytest.approx(0.25)


def test_default_b_max():
    assert default_b_max(ConstantPhi()) == 1.0
    assert default_b_max(RandersPhi()) == pytest.approx(0.9)


@pytest.mark.parametrize("base", TRANSFORM_BASES, ids=lambda f: f.label)
@pytest.mark.parametrize("mu, nu", [(0.5, -0.25), (-0.3, 0.6), (1.0, 1.0)])
def test_group_laws(base, mu, nu):
    report = verify_group_laws(base, mu, nu, grid=15)
    assert report.identity_deviation < 1e-15
    assert report.composition_deviation < 1e-12
    assert report.to_dict()["mu"] == mu
    assert report.passes(1e-10)


def test_group_law_verdict():
    report = GroupLawReport(family="constant", mu=0.5, nu=0.0, grid=3)
    assert report.passes(1e-12)
    report.composition_deviation = 1e-6
    assert not report.passes(1e-8)


@pytest.mark.parametrize("base", TRANSFORM_BASES, ids=lambda f: f.label)
@pytest.mark.parametrize("mu", [-0.5, 0.5, 2.0])
def test_transform_preserves_solutions(base, mu):
    report = verify_solution_closure(base, mu, grid=31)
    assert report.passes(1e-8)


@pytest.mark.parametrize("phi", REPRESENTED, ids=lambda f: f.label)
@pytest.mark.parametrize("mu, nu", [(0.3, -0.5), (-0.2, 0.4), (0.0, 1.0)])
def test_equivalence_of_representations(phi, mu, nu):
    for x, y in [
        ([0.2, 0.1], [1.0, 0.5]),
        ([-0.3, 0.05], [0.2, -1.0]),
        ([0.1, -0.1, 0.2], [0.3, 0.4, -0.5]),
    ]:
        assert equivalence_of_representations(phi, mu, nu, x, y) < 1e-12


def test_transform_table_of_constant():
    table = transform_table(ConstantPhi(), mu=1.0)
    assert list(table.columns) == TRANSFORM_COLUMNS
    assert len(table) == 21 * 21
    expected = [
        constant_transform_closed_form(1.0, b * b, s)
        for b, s in zip(table["b"], table["s"])
    ]
    np.testing.assert_allclose(table["phi"], expected, rtol=1e-12)


def test_transform_table_skips_outside_domain():
    # T_{-1}(1) needs b < 1
    table = transform_table(ConstantPhi(), mu=-1.0, grid=11, b_max=1.2)
    assert len(table) < 11 * 11
    assert table["b"].max() < 1.0
