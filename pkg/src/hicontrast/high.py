"""Expansion ``u = sum_i eta**-i u_i`` for high-conductivity inclusions.

Every term is computed without reference to the contrast: ``u_0`` is the
limit that is constant on each inclusion, and each further term comes from a
mean-zero Neumann solve inside every inclusion (driven by the weak flux of
the previous term), a Dirichlet solve in the background, and an
``A_geom`` correction that restores the compatibility of the next Neumann
problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import HarmonicBasis, build_basis, solve_constants
from .expansion import Expansion
from .fem import FEFunction, PiecewiseData, Subdomains, assemble_load
from .mesh import Mesh

DEFAULT_ORDER = 8


@dataclass(frozen=True, eq=False)
class HighScenario:
    mesh: Mesh
    data: PiecewiseData
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be >= 0")


def _basis_for(scenario: HighScenario, basis: HarmonicBasis | None) -> HarmonicBasis:
    if basis is None:
        return build_basis(Subdomains(scenario.mesh))
    if not basis.mesh.same_as(scenario.mesh):
        raise ValueError("basis was built on a different mesh")
    return basis


def compute_u00(scenario: HighScenario, basis: HarmonicBasis) -> FEFunction:
    """Background solve with ``g`` on the outer boundary and zero on every inclusion."""
    sub = basis.subdomains
    values = np.zeros(scenario.mesh.n_vertices)
    outer = sub.index.outer
    values[outer] = scenario.data.boundary_values(scenario.mesh.vertices[outer])
    u00, _ = sub.background().solve(sub.load(scenario.data, 0), values)
    return u00


def limit_rhs(scenario: HighScenario, basis: HarmonicBasis, u00: FEFunction) -> np.ndarray:
    """``b_j = int_D f chi_j - int_{D_0} grad u00 . grad chi_j``."""
    b = assemble_load(scenario.mesh, scenario.data)
    return np.array([chi.values @ b for chi in basis.chis]) - basis.energy_products(u00)


def compute_u0(scenario: HighScenario, basis: HarmonicBasis | None = None) -> tuple[FEFunction, np.ndarray]:
    """Limit term ``u_0 = u00 + sum_m c_m chi_m`` and its inclusion constants."""
    basis = _basis_for(scenario, basis)
    u00 = compute_u00(scenario, basis)
    x = solve_constants(basis, limit_rhs(scenario, basis, u00))
    return FEFunction(scenario.mesh, u00.values + basis.combination(x)), x


def c_u0_energy(scenario: HighScenario, basis: HarmonicBasis) -> float:
    """Single-inclusion constant from the energy quotient."""
    (chi,) = basis.chis
    u00 = compute_u00(scenario, basis)
    k0 = basis.subdomains.stiffness(0)
    b = assemble_load(scenario.mesh, scenario.data)
    return float((chi.values @ b - chi.values @ (k0 @ u00.values)) / (chi.values @ (k0 @ chi.values)))


def c_u0_flux(scenario: HighScenario, basis: HarmonicBasis) -> float:
    """Single-inclusion constant from the flux balance across the interface.

    The numerator is the inclusion forcing minus the weak flux of ``u00``; the
    denominator is the weak flux of ``chi``.
    """
    (m,) = basis.inclusions
    (chi,) = basis.chis
    sub = basis.subdomains
    iface = sub.index.interface[m]
    u00 = compute_u00(scenario, basis)
    inclusion_force = sub.load(scenario.data, m).sum()
    flux_u00 = sub.residual_flux(u00, 0, scenario.data)[iface].sum()
    flux_chi = sub.residual_flux(chi, 0)[iface].sum()
    return float((inclusion_force - flux_u00) / flux_chi)


def step(expansion: Expansion, basis: HarmonicBasis, i: int):
    """Compute ``u_{i+1}`` from ``u_i``.

    Returns the new term, its constants ``c_{i+1, m}`` and the Neumann solve
    reports (one per inclusion).
    """
    sub = basis.subdomains
    mesh = expansion.mesh
    data = expansion.data
    u_i = expansion.term(i)
    first = i == 0
    tilde = np.zeros(mesh.n_vertices)
    reports = []
    for m in basis.inclusions:
        load = -sub.interface_flux(u_i, 0, m, data if first else None)
        scale = sub.flux_scale(u_i, 0, m, data if first else None)
        if first:
            load = load + sub.load(data, m)
            scale += float(np.linalg.norm(sub.load(data, m)))
        part, report = sub.inclusion_neumann(m).solve(load, scale)
        reports.append(report)
        nodes = sub.index.closed(m)
        tilde[nodes] = part.values[nodes]
    tilde_fn, _ = sub.background().solve(np.zeros(mesh.n_vertices), tilde)
    y = solve_constants(basis, -basis.energy_products(tilde_fn))
    return FEFunction(mesh, tilde_fn.values + basis.combination(y)), y, reports


def expand_high(scenario: HighScenario, basis: HarmonicBasis | None = None) -> Expansion:
    basis = _basis_for(scenario, basis)
    u0, x = compute_u0(scenario, basis)
    exp = Expansion(scenario.mesh, scenario.data, "high", 0, inclusions=basis.inclusions).extended(u0, x)
    for i in range(scenario.order):
        term, y, reports = step(exp, basis, i)
        exp = exp.extended(term, y, reports)
    return exp


def evaluate(expansion: Expansion, eta: float, order: int | None = None) -> FEFunction:
    """Partial sum ``sum_{i <= order} eta**-i u_i``."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    return expansion.partial_sum(1.0 / eta, order)
