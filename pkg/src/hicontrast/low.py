"""Expansion ``u = eps**-1 u_{-1} + u_0 + eps u_1 + ...`` for low-conductivity inclusions.

Each index alternates two half-steps: the background term is obtained from a
problem with Dirichlet data on the outer boundary and Neumann data given by
the weak flux of the previous term out of each inclusion; the inclusion
values then follow by harmonic Dirichlet extension of the trace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expansion import Expansion
from .fem import FEFunction, PiecewiseData, Subdomains
from .mesh import Mesh

DEFAULT_ORDER = 8


@dataclass(frozen=True, eq=False)
class LowScenario:
    mesh: Mesh
    data: PiecewiseData
    order: int = DEFAULT_ORDER

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be >= 0")


def _inclusions(sub: Subdomains):
    return range(1, sub.n_inclusions + 1)


def _extend_into_inclusions(sub: Subdomains, values: np.ndarray, inclusions) -> FEFunction:
    """Replace inclusion interiors by the discrete harmonic extension of the trace."""
    zero = np.zeros(sub.mesh.n_vertices)
    out = values.copy()
    for m in inclusions:
        ext, _ = sub.inclusion_dirichlet(m).solve(zero, values)
        inner = sub.index.interior[m]
        out[inner] = ext.values[inner]
    return FEFunction(sub.mesh, out)


def compute_u_minus1(scenario: LowScenario, sub: Subdomains | None = None, inclusions=None) -> FEFunction:
    """Zero outside the inclusions; inside each, ``-Δu = f`` with zero boundary values."""
    sub = sub or Subdomains(scenario.mesh)
    inclusions = _inclusions(sub) if inclusions is None else inclusions
    out = np.zeros(scenario.mesh.n_vertices)
    zero = np.zeros(scenario.mesh.n_vertices)
    for m in inclusions:
        part, _ = sub.inclusion_dirichlet(m).solve(sub.load(scenario.data, m), zero)
        inner = sub.index.interior[m]
        out[inner] = part.values[inner]
    return FEFunction(scenario.mesh, out)


def compute_u0_low(scenario: LowScenario, u_minus1: FEFunction, sub: Subdomains | None = None) -> FEFunction:
    """Background problem with ``g`` on ``∂D`` and the inclusion outflux of ``u_{-1}``."""
    sub = sub or Subdomains(scenario.mesh)
    incs = tuple(_inclusions(sub))
    load = sub.load(scenario.data, 0)
    for m in incs:
        load = load - sub.interface_flux(u_minus1, m, m, scenario.data)
    values = np.zeros(scenario.mesh.n_vertices)
    outer = sub.index.outer
    values[outer] = scenario.data.boundary_values(scenario.mesh.vertices[outer])
    u0, _ = sub.background(natural=incs).solve(load, values)
    return _extend_into_inclusions(sub, u0.values, incs)


def step_low(expansion: Expansion, i: int, sub: Subdomains | None = None) -> FEFunction:
    """``u_i`` for ``i >= 1`` from the inclusion outflux of ``u_{i-1}``."""
    if i < 1:
        raise ValueError("step_low computes terms with i >= 1")
    sub = sub or Subdomains(expansion.mesh)
    incs = tuple(_inclusions(sub))
    prev = expansion.term(i - 1)
    load = np.zeros(expansion.mesh.n_vertices)
    for m in incs:
        load = load - sub.interface_flux(prev, m, m)
    u_bg, _ = sub.background(natural=incs).solve(load, None)
    return _extend_into_inclusions(sub, u_bg.values, incs)


def interface_data(expansion: Expansion, i: int, sub: Subdomains) -> np.ndarray:
    """Neumann data used on the interfaces when computing ``u_i``."""
    prev = expansion.term(i - 1)
    data = expansion.data if i == 0 else None
    out = np.zeros(expansion.mesh.n_vertices)
    for m in range(1, sub.n_inclusions + 1):
        out -= sub.interface_flux(prev, m, m, data)
    return out


def expand_low(scenario: LowScenario, sub: Subdomains | None = None) -> Expansion:
    sub = sub or Subdomains(scenario.mesh)
    u_m1 = compute_u_minus1(scenario, sub)
    exp = Expansion(scenario.mesh, scenario.data, "low", -1).extended(u_m1)
    exp = exp.extended(compute_u0_low(scenario, u_m1, sub))
    for i in range(1, scenario.order + 1):
        exp = exp.extended(step_low(exp, i, sub))
    return exp


def evaluate_low(expansion: Expansion, eps: float, order: int | None = None) -> FEFunction:
    """``eps**-1 u_{-1} + sum_{i <= order} eps**i u_i``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    return expansion.partial_sum(eps, order)
