"""One high-conductivity and one low-conductivity inclusion.

With ``kappa = eta`` on the high inclusion and ``1/eta`` on the low one the
solution is expanded as ``eta u_{-1} + u_0 + eta**-1 u_1 + ...``.  Each step
combines the two pure recursions: a mean-zero Neumann solve in the high
inclusion, a background problem that is Dirichlet on ``∂D`` and on the high
interface but Neumann on the low interface, a compatibility constant, and
a harmonic extension into the low inclusion.

The compatibility constant for ``i >= 1`` is not spelled out in closed form
in the literature this follows; here it is the flux-balancing constant of
the high inclusion computed with the characteristic function of the
background-with-Neumann-low-interface problem, i.e. the same construction
as for ``u_0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .basis import HarmonicBasis, build_basis, solve_constants
from .expansion import Expansion
from .fem import FEFunction, PiecewiseData, Subdomains
from .mesh import Mesh

DEFAULT_ORDER = 8
ROLES = ("high", "low")


@dataclass(frozen=True, eq=False)
class MixedScenario:
    """``roles`` maps inclusion index to ``"high"`` or ``"low"``.

    Exactly one high inclusion is required and at most one low inclusion is
    supported; inclusions not listed are treated as background material
    (conductivity 1) only if the mesh has been retagged accordingly.
    """

    mesh: Mesh
    roles: Mapping[int, str]
    data: PiecewiseData
    order: int = DEFAULT_ORDER
    _sorted: tuple = field(init=False, repr=False, default=())

    def __post_init__(self):
        roles = {int(m): str(r) for m, r in self.roles.items()}
        if set(roles) != set(range(1, self.mesh.n_inclusions + 1)):
            raise ValueError("every inclusion of the mesh needs a role")
        if any(r not in ROLES for r in roles.values()):
            raise ValueError(f"roles must be one of {ROLES}")
        high = tuple(m for m, r in sorted(roles.items()) if r == "high")
        low = tuple(m for m, r in sorted(roles.items()) if r == "low")
        if len(high) != 1 or len(low) > 1:
            raise NotImplementedError("only one high inclusion plus at most one low inclusion is supported")
        if self.order < 0:
            raise ValueError("order must be >= 0")
        object.__setattr__(self, "roles", roles)
        object.__setattr__(self, "_sorted", (high, low))

    @property
    def high(self) -> tuple:
        return self._sorted[0]

    @property
    def low(self) -> tuple:
        return self._sorted[1]


def mixed_basis(scenario: MixedScenario, sub: Subdomains | None = None) -> HarmonicBasis:
    """Characteristic functions of the high inclusion with natural conditions on low interfaces."""
    sub = sub or Subdomains(scenario.mesh)
    return build_basis(sub, inclusions=scenario.high, natural=scenario.low)


def _extend(sub: Subdomains, values: np.ndarray, inclusions) -> np.ndarray:
    zero = np.zeros(sub.mesh.n_vertices)
    out = values.copy()
    for m in inclusions:
        ext, _ = sub.inclusion_dirichlet(m).solve(zero, values)
        inner = sub.index.interior[m]
        out[inner] = ext.values[inner]
    return out


def compute_mixed_u_minus1(scenario: MixedScenario, sub: Subdomains | None = None) -> FEFunction:
    """Zero on the background and the high inclusion; ``-Δu = f``, zero trace, in the low one."""
    sub = sub or Subdomains(scenario.mesh)
    out = np.zeros(scenario.mesh.n_vertices)
    zero = np.zeros(scenario.mesh.n_vertices)
    for m in scenario.low:
        part, _ = sub.inclusion_dirichlet(m).solve(sub.load(scenario.data, m), zero)
        inner = sub.index.interior[m]
        out[inner] = part.values[inner]
    return FEFunction(scenario.mesh, out)


def _low_interface_load(sub, u, low, data=None):
    load = np.zeros(sub.mesh.n_vertices)
    for m in low:
        load -= sub.interface_flux(u, m, m, data)
    return load


def compute_mixed_u0(scenario: MixedScenario, basis: HarmonicBasis, u_minus1: FEFunction) -> tuple[FEFunction, np.ndarray]:
    """Limit term: constant on the high inclusion, harmonic extension into the low one."""
    sub = basis.subdomains
    mesh = scenario.mesh
    data = scenario.data
    load = sub.load(data, 0) + _low_interface_load(sub, u_minus1, scenario.low, data)
    values = np.zeros(mesh.n_vertices)
    outer = sub.index.outer
    values[outer] = data.boundary_values(mesh.vertices[outer])
    u00, _ = sub.background(natural=scenario.low).solve(load, values)
    rhs = np.array([chi.values @ load for chi in basis.chis])
    rhs += np.array([sub.load(data, m).sum() for m in basis.inclusions])
    rhs -= basis.energy_products(u00)
    x = solve_constants(basis, rhs)
    u0 = u00.values + basis.combination(x)
    return FEFunction(mesh, _extend(sub, u0, scenario.low)), x


def step_mixed(expansion: Expansion, basis: HarmonicBasis, scenario: MixedScenario, i: int):
    """``u_{i+1}`` from ``u_i`` (and, through its low-inclusion values, ``u_{i-1}``)."""
    sub = basis.subdomains
    mesh = expansion.mesh
    data = expansion.data
    u_i = expansion.term(i)
    first = i == 0
    tilde = np.zeros(mesh.n_vertices)
    reports = []
    for m in scenario.high:
        load = -sub.interface_flux(u_i, 0, m, data if first else None)
        scale = sub.flux_scale(u_i, 0, m, data if first else None)
        if first:
            load = load + sub.load(data, m)
            scale += float(np.linalg.norm(sub.load(data, m)))
        part, report = sub.inclusion_neumann(m).solve(load, scale)
        reports.append(report)
        nodes = sub.index.closed(m)
        tilde[nodes] = part.values[nodes]
    neumann = _low_interface_load(sub, u_i, scenario.low)
    tilde_fn, _ = sub.background(natural=scenario.low).solve(neumann, tilde)
    rhs = np.array([chi.values @ neumann for chi in basis.chis]) - basis.energy_products(tilde_fn)
    y = solve_constants(basis, rhs)
    u = tilde_fn.values + basis.combination(y)
    return FEFunction(mesh, _extend(sub, u, scenario.low)), y, reports


def expand_mixed(scenario: MixedScenario, basis: HarmonicBasis | None = None) -> Expansion:
    basis = basis or mixed_basis(scenario)
    u_m1 = compute_mixed_u_minus1(scenario, basis.subdomains)
    exp = Expansion(scenario.mesh, scenario.data, "mixed", -1, inclusions=basis.inclusions)
    exp = exp.extended(u_m1, np.zeros(basis.size))
    u0, x = compute_mixed_u0(scenario, basis, u_m1)
    exp = exp.extended(u0, x)
    for i in range(scenario.order):
        term, y, reports = step_mixed(exp, basis, scenario, i)
        exp = exp.extended(term, y, reports)
    return exp


def evaluate_mixed(expansion: Expansion, eta: float, order: int | None = None) -> FEFunction:
    """``eta u_{-1} + sum_{i <= order} eta**-i u_i``."""
    if not eta > 0:
        raise ValueError("eta must be positive")
    return expansion.partial_sum(1.0 / eta, order)
