"""Direct solve of the full contrast problem on the same mesh."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.sparse.linalg as spla

from .errors import MeshMismatch, SolverDiverged
from .fem import DEFAULT_TOL, DirichletSolver, FEFunction, PiecewiseData, SolveReport, assemble_load, assemble_stiffness, h1_norm, l2_norm
from .mesh import Mesh, classify


@dataclass(frozen=True)
class ContrastCoefficient:
    """Positive conductivity per subdomain, background first."""

    values: tuple

    def __post_init__(self):
        v = tuple(float(x) for x in self.values)
        if not v or not all(x > 0 for x in v):
            raise ValueError("conductivities must be positive")
        object.__setattr__(self, "values", v)

    @classmethod
    def high(cls, n_inclusions: int, eta: float) -> "ContrastCoefficient":
        return cls((1.0,) + (eta,) * n_inclusions)

    @classmethod
    def low(cls, n_inclusions: int, eps: float) -> "ContrastCoefficient":
        return cls((1.0,) + (eps,) * n_inclusions)

    @classmethod
    def mixed(cls, roles: Mapping[int, str], eta: float) -> "ContrastCoefficient":
        """``eta`` on high inclusions, ``1/eta`` on low ones, 1 on unlisted subdomains."""
        n = max(roles) if roles else 0
        vals = [1.0] * (n + 1)
        for m, role in roles.items():
            vals[m] = eta if role == "high" else 1.0 / eta
        return cls(tuple(vals))


def solve_direct(
    mesh: Mesh, coeff: ContrastCoefficient, data: PiecewiseData, *, method: str = "direct", tol: float = DEFAULT_TOL
) -> tuple[FEFunction, SolveReport]:
    """Discrete solution of the weighted problem with Dirichlet data ``g``."""
    if len(coeff.values) != mesh.n_inclusions + 1:
        raise ValueError("one conductivity per subdomain required")
    index = classify(mesh)
    k = assemble_stiffness(mesh, coeff.values)
    free = np.setdiff1d(np.arange(mesh.n_vertices), index.outer)
    values = np.zeros(mesh.n_vertices)
    values[index.outer] = data.boundary_values(mesh.vertices[index.outer])
    try:
        solver = DirichletSolver(mesh, k, free, method=method, tol=tol)
        return solver.solve(assemble_load(mesh, data), values)
    except SolverDiverged as exc:
        kff = k[free][:, free].tocsc()
        report = exc.report or SolveReport(0, float("nan"))
        report.condition_estimate = _condition_estimate(kff)
        raise SolverDiverged(f"{exc} (condition estimate {report.condition_estimate:.2e})", report) from None


def _condition_estimate(a) -> float:
    try:
        lu = spla.splu(a)
        inv = spla.LinearOperator(a.shape, matvec=lu.solve, rmatvec=lambda x: lu.solve(x, trans="T"))
        return float(spla.onenormest(a) * spla.onenormest(inv))
    except RuntimeError:
        return float("inf")


def expansion_error(direct: FEFunction, partial_sum: FEFunction) -> tuple[float, float]:
    """H1 and L2 norms of the nodal difference."""
    if not direct.mesh.same_as(partial_sum.mesh):
        raise MeshMismatch("direct solution and partial sum use different meshes")
    diff = FEFunction(direct.mesh, direct.values - partial_sum.values)
    return h1_norm(diff), l2_norm(diff)
