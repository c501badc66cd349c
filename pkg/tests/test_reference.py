import math

import numpy as np
import pytest

from hicontrast.basis import build_basis
from hicontrast.errors import MeshMismatch, SolverDiverged
from hicontrast.fem import FEFunction, PiecewiseData, assemble_load, assemble_stiffness, h1_norm, h1_seminorm, l2_norm, solve_dirichlet
from hicontrast.high import HighScenario, evaluate, expand_high
from hicontrast.reference import ContrastCoefficient, expansion_error, solve_direct

from conftest import COS_THETA, PROBE, annulus_finite_contrast, annulus_high_limit

FROZEN_C = 1.671


@pytest.fixture(scope="module")
def annulus_exp(annulus, annulus_sub):
    return expand_high(HighScenario(annulus, COS_THETA, 6), build_basis(annulus_sub))


@pytest.mark.parametrize(
    "kappa, tol",
    [((1.0, 10.0, 0.1), 1e-12), ((1.0, 10.0, 10.0), 1e-12), ((1.0, 1e6, 1e-6), 1e-9)],
)
def test_constant_solution_any_contrast(two_disks, kappa, tol):
    """g = 1 reproduces u = 1.

    Stored stiffness rows only sum to zero up to rounding, so a spread of
    1e12 in the coefficient turns that rounding into a visible offset; the
    looser bound at extreme contrast covers it.
    """
    data = PiecewiseData((0.0,) * 3, (1.0, 0.0, 0.0))
    u, _ = solve_direct(two_disks, ContrastCoefficient(kappa), data)
    assert np.abs(u.values - 1.0).max() <= tol


def test_unit_contrast_matches_dirichlet(two_disks):
    from hicontrast.mesh import classify

    data = PiecewiseData((1.0, 2.0, -1.0), (0.5, 1.0, 0.0))
    u, _ = solve_direct(two_disks, ContrastCoefficient((1.0, 1.0, 1.0)), data)
    idx = classify(two_disks)
    bc = {int(p): float(v) for p, v in zip(idx.outer, data.boundary_values(two_disks.vertices[idx.outer]))}
    ref, _ = solve_dirichlet(two_disks, [0, 1, 2], assemble_stiffness(two_disks, [1, 1, 1]), assemble_load(two_disks, data), bc)
    assert np.abs(u.values - ref.values).max() <= 1e-12


def test_extreme_contrast_annulus(annulus, annulus_sub):
    u, _ = solve_direct(annulus, ContrastCoefficient.high(1, 1e6), COS_THETA)
    assert u(*PROBE) == pytest.approx(annulus_high_limit(0.75), abs=2e-2)
    assert np.var(u.values[annulus_sub.index.closed(1)]) <= 1e-4 * h1_norm(u)


@pytest.mark.parametrize("kappa", [0.1, 10.0, 1000.0])
def test_finite_contrast_annulus(annulus, kappa):
    u, _ = solve_direct(annulus, ContrastCoefficient.high(1, kappa), COS_THETA)
    for rho in (0.25, 0.75):
        assert u(rho, 0.0) == pytest.approx(annulus_finite_contrast(rho, kappa), abs=2e-2)


def test_expansion_error_basics(annulus):
    rng = np.random.default_rng(3)
    u = FEFunction(annulus, rng.standard_normal(annulus.n_vertices))
    assert expansion_error(u, u) == (0.0, 0.0)
    shifted = FEFunction(annulus, u.values + 0.7)
    diff = shifted - u
    assert h1_seminorm(diff) == pytest.approx(0.0, abs=1e-10)
    assert l2_norm(diff) == pytest.approx(0.7 * math.sqrt(annulus.area()), rel=1e-12)
    h1, l2 = expansion_error(u, shifted)
    assert l2 == pytest.approx(0.7 * math.sqrt(annulus.area()), rel=1e-12)
    assert h1 == pytest.approx(l2, rel=1e-10)


def test_expansion_error_mesh_mismatch(annulus, square_inclusion):
    with pytest.raises(MeshMismatch):
        expansion_error(FEFunction(annulus, np.zeros(annulus.n_vertices)), FEFunction(square_inclusion, np.zeros(square_inclusion.n_vertices)))


def test_first_step_gain(annulus, annulus_exp):
    u, _ = solve_direct(annulus, ContrastCoefficient.high(1, 1e3), COS_THETA)
    e0 = expansion_error(u, evaluate(annulus_exp, 1e3, 0))[0]
    e1 = expansion_error(u, evaluate(annulus_exp, 1e3, 1))[0]
    assert e1 / e0 == pytest.approx(FROZEN_C / 1e3, rel=2.0)
    assert FROZEN_C / 1e3 / 3 <= e1 / e0 <= 3 * FROZEN_C / 1e3


def test_monotone_approach_to_limit(annulus, annulus_exp):
    u0 = annulus_exp.term(0)
    errs = [h1_norm(solve_direct(annulus, ContrastCoefficient.high(1, eta), COS_THETA)[0] - u0) for eta in (1e2, 1e3, 1e4, 1e5)]
    ratios = [b / a for a, b in zip(errs, errs[1:])]
    assert all(0.05 <= q <= 0.2 for q in ratios)


def test_energy_identity(two_disks):
    data = PiecewiseData((1.0, -2.0, 0.5), (0.2, 1.0, 0.3))
    coeff = ContrastCoefficient((1.0, 50.0, 0.02))
    u, _ = solve_direct(two_disks, coeff, data)
    k = assemble_stiffness(two_disks, coeff.values)
    b = assemble_load(two_disks, data)
    reaction = k @ u.values - b
    energy = u.values @ (k @ u.values)
    assert energy == pytest.approx(b @ u.values + u.values @ reaction, rel=1e-10)


def test_failure_reports_condition_estimate(annulus):
    with pytest.raises(SolverDiverged) as info:
        solve_direct(annulus, ContrastCoefficient.high(1, 1e6), COS_THETA, tol=1e-30)
    assert info.value.report.condition_estimate > 1e6


def test_coefficient_validation(annulus):
    with pytest.raises(ValueError):
        ContrastCoefficient((1.0, -1.0))
    with pytest.raises(ValueError):
        solve_direct(annulus, ContrastCoefficient((1.0,)), COS_THETA)
    assert ContrastCoefficient.mixed({1: "high", 2: "low"}, 100.0).values == (1.0, 100.0, 0.01)
    assert ContrastCoefficient.low(2, 0.1).values == (1.0, 0.1, 0.1)
