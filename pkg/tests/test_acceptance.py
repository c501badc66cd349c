"""Acceptance criteria C1 to C11, each at its stated tolerance.

Every test records one PASS/FAIL line (printed directly and repeated in the
terminal summary) before asserting, so a plain ``pytest -v`` run shows the
whole scorecard.
"""

import math
import time

import numpy as np
import pytest

from hicontrast.basis import build_basis
from hicontrast.experiments import build_expansion, build_mesh, parse_scenario, run_study
from hicontrast.fem import PiecewiseData, Subdomains, h1_norm
from hicontrast.high import HighScenario, c_u0_energy, c_u0_flux, compute_u0, evaluate, expand_high
from hicontrast.low import LowScenario, expand_low
from hicontrast.mixed import MixedScenario, evaluate_mixed, expand_mixed, mixed_basis
from hicontrast.reference import ContrastCoefficient, solve_direct

from conftest import ACCEPTANCE_LINES, COS_THETA, PROBE

ANNULUS_HIGH = """
mode = high
geometry.domain = disk 0 0 1
inclusion.1.shape = disk 0 0 0.5
boundary.g = 0 1 0
mesh.h = 0.05
"""


def record(criterion, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'} {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


@pytest.fixture(scope="module")
def annulus_basis(annulus_sub):
    return build_basis(annulus_sub)


@pytest.fixture(scope="module")
def two_sub(two_disks):
    return Subdomains(two_disks)


def test_c1_geometric_convergence_in_order(annulus):
    eta = 1e3
    scenario = parse_scenario(ANNULUS_HIGH + f"sweep.eta = {eta}\nexpansion.order = 8\n")
    study = run_study(scenario, mesh=annulus, timing=False)
    c_hat = study.summary["C_hat"]
    errs = {r.I: r.h1_error for r in study.rows}
    floor = study.summary["floor"]
    target = eta / c_hat
    factors = [errs[i] / errs[i + 1] for i in range(5) if errs[i + 1] > 10 * floor]
    ok = math.isfinite(c_hat) and c_hat > 0 and len(factors) >= 3
    ok = ok and all(0.5 * target <= f <= 2 * target for f in factors)
    record("C1", ok, f"C_hat={c_hat:.4g}, eta/C_hat={target:.4g}, factors={[f'{f:.4g}' for f in factors]}")


def test_c2_first_order_in_contrast(annulus, annulus_basis):
    u0 = expand_high(HighScenario(annulus, COS_THETA, 0), annulus_basis).term(0)
    errs = [h1_norm(solve_direct(annulus, ContrastCoefficient.high(1, eta), COS_THETA)[0] - u0) for eta in (1e2, 1e3, 1e4)]
    ratios = [b / a for a, b in zip(errs, errs[1:])]
    record("C2", all(0.05 <= q <= 0.2 for q in ratios), f"errors={[f'{e:.3e}' for e in errs]}, ratios={[f'{q:.4f}' for q in ratios]}")


def test_c3_analytic_limit_values(annulus, annulus_sub, annulus_basis):
    high = compute_u0(HighScenario(annulus, COS_THETA), annulus_basis)[0](*PROBE)
    low = expand_low(LowScenario(annulus, COS_THETA, 0), annulus_sub).term(0)(*PROBE)
    a11 = annulus_basis.a_geom[0, 0]
    exact = 2 * math.pi / math.log(2)
    ok = abs(high - 0.5556) <= 0.02 and abs(low - 0.8667) <= 0.02 and abs(a11 / exact - 1) <= 0.02
    record("C3", ok, f"u0 high={high:.4f} (0.5556), u0 low={low:.4f} (0.8667), a11={a11:.4f} ({exact:.4f})")


def test_c4_compatibility(annulus, annulus_basis, square_inclusion, two_disks, two_sub):
    expansions = [
        expand_high(HighScenario(annulus, COS_THETA, 8), annulus_basis),
        expand_high(HighScenario(square_inclusion, PiecewiseData((1.0, 2.0), (0.3, 0.5, 2.0)), 6)),
        expand_high(HighScenario(two_disks, PiecewiseData((1.0, 0.0, 2.0), (0.2, 1.0, -0.5)), 6), build_basis(two_sub)),
    ]
    mixed = MixedScenario(two_disks, {1: "high", 2: "low"}, PiecewiseData((0.0, 0.0, 1.0), (0.0, 1.0, 0.0)), 8)
    expansions.append(expand_mixed(mixed, mixed_basis(mixed, two_sub)))
    worst = max(max(e.defects()) for e in expansions)
    count = sum(len(e.defects()) for e in expansions)
    record("C4", worst <= 1e-10, f"max defect {worst:.3e} over {count} Neumann solves")


def test_c5_orthogonality_two_inclusions(two_disks, two_sub):
    basis = build_basis(two_sub)
    exp = expand_high(HighScenario(two_disks, PiecewiseData((1.0, 0.0, 2.0), (0.2, 1.0, -0.5)), 6), basis)
    worst = max(np.abs(basis.energy_products(exp.term(i))).max() / h1_norm(exp.term(i)) for i in range(1, 7))
    record("C5", worst <= 1e-10, f"max |chi_m^T K u_i| / |u_i| = {worst:.3e} (M=2)")


def test_c6_constant_formulas(square_inclusion):
    basis = build_basis(Subdomains(square_inclusion))
    cases = {
        "symmetric": PiecewiseData((0.0, 0.0), (0.0, 1.0, 0.0)),
        "asymmetric": PiecewiseData((0.0, 0.0), (0.3, 0.5, 2.0)),
        "forced": PiecewiseData((1.0, 2.0), (0.0, 1.0, 0.0)),
    }
    gaps = {}
    for name, data in cases.items():
        s = HighScenario(square_inclusion, data)
        gaps[name] = abs(c_u0_energy(s, basis) - c_u0_flux(s, basis))
    record("C6", max(gaps.values()) <= 1e-10, ", ".join(f"{k} {v:.1e}" for k, v in gaps.items()))


def test_c7_constancy(annulus, annulus_sub, annulus_basis):
    inside = annulus_sub.index.closed(1)
    u0 = compute_u0(HighScenario(annulus, COS_THETA), annulus_basis)[0]
    direct, _ = solve_direct(annulus, ContrastCoefficient.high(1, 1e6), COS_THETA)
    var0 = float(np.var(u0.values[inside]))
    var_direct = float(np.var(direct.values[inside]))
    bound = 1e-4 * h1_norm(direct)
    record("C7", var0 <= 1e-12 and var_direct <= bound, f"var u0={var0:.2e}, var direct(1e6)={var_direct:.2e} <= {bound:.2e}")


def test_c8_low_contrast_rates(annulus, annulus_sub):
    eps = np.array([1e-2, 1e-3, 1e-4, 1e-5])
    forced = PiecewiseData((0.0, 1.0), (0.0, 1.0, 0.0))
    norms = [h1_norm(solve_direct(annulus, ContrastCoefficient.low(1, e), forced)[0]) for e in eps]
    blow_up = np.polyfit(np.log(eps), np.log(norms), 1)[0]
    exp = expand_low(LowScenario(annulus, COS_THETA, 0), annulus_sub)
    u_minus1 = float(np.abs(exp.term(-1).values).max())
    errs = [h1_norm(solve_direct(annulus, ContrastCoefficient.low(1, e), COS_THETA)[0] - exp.term(0)) for e in eps]
    reduction = np.polyfit(np.log(eps), np.log(errs), 1)[0]
    ok = abs(blow_up + 1) <= 0.1 and u_minus1 == 0.0 and abs(reduction - 1) <= 0.15
    record("C8", ok, f"blow-up slope {blow_up:.4f}, max|u_-1| (f=0) {u_minus1:.1e}, reduction slope {reduction:.4f}")


def test_c9_mixed_reduces_to_high(two_disks):
    g = (0.1, 1.0, -0.4)
    merged = two_disks.retagged({2: 0})
    sub = Subdomains(merged)
    data = PiecewiseData((0.5, 1.0), g)
    mixed = MixedScenario(merged, {1: "high"}, data, 6)
    m_exp = expand_mixed(mixed, mixed_basis(mixed, sub))
    h_exp = expand_high(HighScenario(merged, data, 6), build_basis(sub))
    worst = max(
        float(np.abs(evaluate_mixed(m_exp, eta, k).values - evaluate(h_exp, eta, k).values).max())
        for eta in (1e2, 1e3, 1e4)
        for k in range(7)
    )
    record("C9", worst <= 1e-10, f"max partial-sum difference {worst:.2e}")


def test_c10_precomputation_pays_off():
    scenario = parse_scenario(ANNULUS_HIGH)
    mesh = build_mesh(scenario)
    etas = (1e2, 1e3, 1e4, 1e5)
    best_direct, best_expansion = math.inf, math.inf
    for _ in range(7):
        t = time.perf_counter()
        for eta in etas:
            solve_direct(mesh, ContrastCoefficient.high(1, eta), scenario.data)
        best_direct = min(best_direct, time.perf_counter() - t)
        t = time.perf_counter()
        exp = build_expansion(scenario, mesh)
        for eta in etas:
            evaluate(exp, eta)
        best_expansion = min(best_expansion, time.perf_counter() - t)
    ratio = best_expansion / best_direct
    record("C10", ratio < 0.5, f"expansion {best_expansion * 1e3:.1f} ms vs direct {best_direct * 1e3:.1f} ms, ratio {ratio:.2f}")


def test_c11_constant_data_all_modes(annulus, annulus_sub, annulus_basis, two_disks, two_sub):
    ones = PiecewiseData((0.0, 0.0), (1.0, 0.0, 0.0))
    mixed = MixedScenario(two_disks, {1: "high", 2: "low"}, PiecewiseData((0.0,) * 3, (1.0, 0.0, 0.0)), 6)
    expansions = {
        "high": expand_high(HighScenario(annulus, ones, 6), annulus_basis),
        "low": expand_low(LowScenario(annulus, ones, 6), annulus_sub),
        "mixed": expand_mixed(mixed, mixed_basis(mixed, two_sub)),
    }
    worst = {}
    for mode, exp in expansions.items():
        dev = np.abs(exp.term(0).values - 1.0).max()
        for k in range(exp.first_index, exp.order + 1):
            if k != 0:
                dev = max(dev, np.abs(exp.term(k).values).max())
        worst[mode] = float(dev)
    record("C11", max(worst.values()) <= 1e-12, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
