"""Invariant suite for a computed expansion.

Each check is evaluated on the discrete operators, so the thresholds are
round-off sized rather than discretization sized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import HarmonicBasis
from .expansion import Expansion
from .fem import Subdomains

COMPATIBILITY_TOL = 1e-10
ORTHOGONALITY_TOL = 1e-10
CONSTANCY_TOL = 1e-12
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.threshold)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.value:.3e} <= {self.threshold:.1e}"


def _scale(values) -> float:
    return max(1.0, float(np.max(np.abs(values), initial=0.0)))


def compatibility(expansion: Expansion) -> CheckResult:
    return CheckResult("compatibility defect", max(expansion.defects(), default=0.0), COMPATIBILITY_TOL)


def orthogonality(expansion: Expansion, basis: HarmonicBasis) -> CheckResult:
    """``chi_m^T K_0 u_i`` relative to ``|u_i|`` for ``i >= 1`` (high mode)."""
    worst = 0.0
    for k in range(1, expansion.order + 1):
        u = expansion.term(k)
        prods = basis.energy_products(u)
        worst = max(worst, float(np.max(np.abs(prods), initial=0.0)) / _scale(u.values))
    return CheckResult("orthogonality", worst, ORTHOGONALITY_TOL)


def constancy(expansion: Expansion, sub: Subdomains, inclusions) -> CheckResult:
    """Nodal variance of ``u_0`` over each high-conductivity inclusion."""
    u0 = expansion.term(0).values
    worst = max((float(np.var(u0[sub.index.closed(m)])) for m in inclusions), default=0.0)
    return CheckResult("constancy of u_0", worst, CONSTANCY_TOL)


def boundary_values(expansion: Expansion, sub: Subdomains) -> CheckResult:
    """``u_0 = g`` and every other term vanishes on the outer boundary."""
    outer = sub.index.outer
    g = expansion.data.boundary_values(expansion.mesh.vertices[outer])
    worst = 0.0
    for k in range(expansion.first_index, expansion.order + 1):
        target = g if k == 0 else 0.0
        worst = max(worst, float(np.max(np.abs(expansion.term(k).values[outer] - target), initial=0.0)))
    return CheckResult("outer boundary values", worst, RESIDUAL_TOL)


def harmonicity(expansion: Expansion, sub: Subdomains, low=()) -> CheckResult:
    """Discrete PDE residual on background interior nodes and inside low inclusions.

    The background equation is ``-Δu_0 = f`` and ``-Δu_i = 0`` otherwise; a
    low inclusion carries ``-Δu_{-1} = f`` and harmonic higher terms.
    """
    data = expansion.data
    worst = 0.0
    for k in range(expansion.first_index, expansion.order + 1):
        u = expansion.term(k)
        if k >= 0:
            r = sub.residual_flux(u, 0, data if k == 0 else None)[sub.index.interior[0]]
            worst = max(worst, float(np.max(np.abs(r), initial=0.0)) / _scale(u.values))
        for m in low:
            r = sub.residual_flux(u, m, data if k == -1 else None)[sub.index.interior[m]]
            worst = max(worst, float(np.max(np.abs(r), initial=0.0)) / _scale(u.values))
    return CheckResult("subdomain residual", worst, RESIDUAL_TOL)


def flux_matching(expansion: Expansion, sub: Subdomains, low) -> CheckResult:
    """On low interfaces the background flux of ``u_{i}`` cancels the inclusion flux of ``u_{i-1}``."""
    data = expansion.data
    worst = 0.0
    for k in range(max(0, expansion.first_index + 1), expansion.order + 1):
        u, prev = expansion.term(k), expansion.term(k - 1)
        for m in low:
            nodes = sub.index.interface[m]
            total = sub.residual_flux(u, 0, data if k == 0 else None) + sub.residual_flux(prev, m, data if k == 0 else None)
            worst = max(worst, float(np.max(np.abs(total[nodes]), initial=0.0)) / _scale(u.values))
    return CheckResult("interface flux matching", worst, RESIDUAL_TOL)


def run_checks(expansion: Expansion, sub: Subdomains, basis: HarmonicBasis | None = None, roles=None) -> list[CheckResult]:
    """Every invariant that applies to the expansion's mode."""
    n = sub.n_inclusions
    if expansion.mode == "high":
        high, low = tuple(range(1, n + 1)), ()
    elif expansion.mode == "low":
        high, low = (), tuple(range(1, n + 1))
    else:
        roles = roles or {}
        high = tuple(m for m in range(1, n + 1) if roles.get(m) == "high")
        low = tuple(m for m in range(1, n + 1) if roles.get(m) == "low")
    results = [boundary_values(expansion, sub), harmonicity(expansion, sub, low)]
    if high:
        results += [compatibility(expansion), constancy(expansion, sub, high)]
    if expansion.mode == "high" and basis is not None:
        results.append(orthogonality(expansion, basis))
    if low:
        results.append(flux_matching(expansion, sub, low))
    return results
