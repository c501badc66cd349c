import math

import numpy as np
import pytest

from hicontrast.fem import FEFunction, PiecewiseData, Subdomains, h1_norm
from hicontrast.mesh import generate, rectangle
from hicontrast.low import LowScenario, compute_u0_low, compute_u_minus1, evaluate_low, expand_low, interface_data, step_low
from hicontrast.reference import ContrastCoefficient, solve_direct

from conftest import COS_THETA, PROBE, annulus_low_limit

FROZEN_RATIO = 0.598  # reference run, annulus at h = 0.05
SQUARE_TORSION = 0.07367  # max of u for -Δu = 1 on the unit square, zero boundary values


@pytest.fixture(scope="module")
def annulus_low(annulus, annulus_sub):
    return expand_low(LowScenario(annulus, COS_THETA, 8), annulus_sub)


@pytest.fixture(scope="module")
def forced_low(annulus, annulus_sub):
    return expand_low(LowScenario(annulus, PiecewiseData((0.5, 1.0), (0.0, 1.0, 0.0)), 6), annulus_sub)


def test_u_minus1_zero_without_inclusion_forcing(annulus_low):
    assert not annulus_low.term(-1).values.any()


def test_u_minus1_disk_torsion(annulus, annulus_sub):
    u = compute_u_minus1(LowScenario(annulus, PiecewiseData((0.0, 1.0))), annulus_sub)
    assert u(0.0, 0.0) == pytest.approx(0.25 * 0.25, abs=2e-3)


def test_u_minus1_square_torsion():
    # 24 interior nodes at h = 0.05 undershoot the peak by 5 %; refine the inclusion
    fine = generate(rectangle(0, 0, 1, 1), [rectangle(0.4, 0.4, 0.6, 0.6)], 0.02)
    u = compute_u_minus1(LowScenario(fine, PiecewiseData((0.0, 1.0))))
    assert u.values.max() == pytest.approx(0.2**2 * SQUARE_TORSION, rel=0.05)


def test_u_minus1_support(forced_low, annulus_sub):
    u = forced_low.term(-1).values
    idx = annulus_sub.index
    assert not u[idx.closed(0)].any()
    assert u[idx.interior[1]].min() > 0


def test_u0_constant_data(annulus, annulus_sub):
    exp = expand_low(LowScenario(annulus, PiecewiseData((0.0, 0.0), (1.0, 0.0, 0.0)), 3), annulus_sub)
    assert np.abs(exp.term(0).values - 1.0).max() <= 1e-12
    for i in (1, 2, 3):
        assert np.abs(exp.term(i).values).max() <= 1e-12


def test_u0_annulus_value(annulus_low):
    assert annulus_low.term(0)(*PROBE) == pytest.approx(annulus_low_limit(0.75), abs=2e-2)


def test_u0_zero_neumann_data(annulus_low, annulus_sub):
    flux = annulus_sub.residual_flux(annulus_low.term(0), 0, COS_THETA)[annulus_sub.index.interface[1]]
    assert np.abs(flux).max() <= 1e-10


def test_ratio_stabilizes(annulus_low):
    norms = [h1_norm(annulus_low.term(i)) for i in range(0, 9)]
    for i in range(1, 7):
        assert norms[i + 1] / norms[i] == pytest.approx(FROZEN_RATIO, rel=0.1)


def test_flux_reciprocity(forced_low, annulus_sub):
    for i in range(0, forced_low.order + 1):
        data = forced_low.data if i == 0 else None
        inside = annulus_sub.residual_flux(forced_low.term(i - 1), 1, data)
        expected = np.zeros_like(inside)
        iface = annulus_sub.index.interface[1]
        expected[iface] = -inside[iface]
        assert np.abs(interface_data(forced_low, i, annulus_sub) - expected).max() <= 1e-10
        if i >= 1:
            outside = annulus_sub.residual_flux(forced_low.term(i), 0)[iface]
            assert np.abs(outside + inside[iface]).max() <= 1e-10 * max(1.0, np.abs(inside).max())


def test_harmonicity(forced_low, annulus_sub):
    idx = annulus_sub.index
    for i in range(0, forced_low.order + 1):
        u = forced_low.term(i)
        assert np.abs(annulus_sub.residual_flux(u, 1)[idx.interior[1]]).max() <= 1e-12
        if i >= 1:
            assert np.abs(annulus_sub.residual_flux(u, 0)[idx.interior[0]]).max() <= 1e-12


def test_boundary_values(forced_low, annulus_sub):
    outer = annulus_sub.index.outer
    g = forced_low.data.boundary_values(forced_low.mesh.vertices[outer])
    assert np.array_equal(forced_low.term(0).values[outer], g)
    for i in [-1, *range(1, forced_low.order + 1)]:
        assert not forced_low.term(i).values[outer].any()
    assert np.allclose(evaluate_low(forced_low, 0.01).values[outer], g, rtol=0, atol=1e-14)


def test_evaluate_low(annulus_low, forced_low):
    assert np.array_equal(evaluate_low(annulus_low, 0.1, 0).values, annulus_low.term(0).values)
    for order in (1, 4):
        diff = evaluate_low(forced_low, 0.05, order) - evaluate_low(forced_low, 0.05, order - 1)
        assert np.allclose(diff.values, 0.05**order * forced_low.term(order).values, rtol=0, atol=1e-15)
    with pytest.raises(ValueError):
        evaluate_low(forced_low, 0.0)


def test_blow_up_rate(annulus, forced_low):
    eps = [1e-2, 1e-3, 1e-4, 1e-5]
    norms = [h1_norm(solve_direct(annulus, ContrastCoefficient.low(1, e), forced_low.data)[0]) for e in eps]
    slope = np.polyfit(np.log(eps), np.log(norms), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.1)
    err = h1_norm(solve_direct(annulus, ContrastCoefficient.low(1, 1e-3), forced_low.data)[0] - evaluate_low(forced_low, 1e-3, 6))
    assert err <= 1e-8 * norms[1]


def test_step_matches_pipeline(annulus_low, annulus_sub):
    again = step_low(annulus_low, 3, annulus_sub)
    assert np.array_equal(again.values, annulus_low.term(3).values)
    with pytest.raises(ValueError):
        step_low(annulus_low, 0, annulus_sub)


def test_u0_low_direct(annulus, annulus_sub):
    scenario = LowScenario(annulus, COS_THETA)
    zero = FEFunction(annulus, np.zeros(annulus.n_vertices))
    assert np.array_equal(compute_u0_low(scenario, zero, annulus_sub).values, expand_low(LowScenario(annulus, COS_THETA, 0), annulus_sub).term(0).values)
    assert math.isfinite(h1_norm(zero))


def test_two_low_inclusions(two_disks):
    sub = Subdomains(two_disks)
    data = PiecewiseData((0.0, 1.0, -1.0), (0.0, 1.0, 0.0))
    exp = expand_low(LowScenario(two_disks, data, 8), sub)
    u = solve_direct(two_disks, ContrastCoefficient.low(2, 1e-3), data)[0]
    errs = [h1_norm(u - evaluate_low(exp, 1e-3, k)) for k in range(4)]
    assert all(b < 0.1 * a for a, b in zip(errs, errs[1:]))
