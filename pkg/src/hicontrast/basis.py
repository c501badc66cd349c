"""Harmonic characteristic functions and the geometry matrix.

``chi_m`` equals 1 on the closure of inclusion ``m``, 0 on the other
inclusions and on the outer boundary, and is discrete-harmonic in the
background.  The Gram matrix ``A_geom[i, j] = chi_i^T K_0 chi_j`` depends
on the geometry only, never on the contrast.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import NotSPD
from .fem import FEFunction, Subdomains
from .mesh import Mesh


@dataclass(frozen=True, eq=False)
class HarmonicBasis:
    """``chis[k]`` belongs to inclusion ``inclusions[k]``.

    ``natural`` lists inclusions whose interfaces carry a natural (Neumann)
    condition for the background problem instead of ``chi = 0``; it is empty
    except for the mixed high/low configuration.
    """

    subdomains: Subdomains
    inclusions: tuple
    chis: tuple
    a_geom: np.ndarray
    cho: tuple
    natural: tuple = ()

    @property
    def mesh(self) -> Mesh:
        return self.subdomains.mesh

    @property
    def size(self) -> int:
        return len(self.inclusions)

    def combination(self, coefficients: Sequence[float]) -> np.ndarray:
        out = np.zeros(self.mesh.n_vertices)
        for c, chi in zip(coefficients, self.chis):
            out += c * chi.values
        return out

    def energy_products(self, u) -> np.ndarray:
        """``chi_j^T K_0 u`` for every basis function (the background energy pairing)."""
        v = u.values if isinstance(u, FEFunction) else np.asarray(u)
        k0u = self.subdomains.stiffness(0) @ v
        return np.array([chi.values @ k0u for chi in self.chis])

    def to_csv(self) -> str:
        return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in self.a_geom)


def compute_chi(subdomains: Subdomains, m: int, natural: Sequence[int] = ()) -> FEFunction:
    """Harmonic characteristic function of inclusion ``m``.

    Reuses the cached background factorization, so computing all of them
    costs one factorization plus one triangular solve pair each.
    """
    idx = subdomains.index
    if not 1 <= m <= idx.n_inclusions:
        raise ValueError(f"inclusion index {m} out of range 1..{idx.n_inclusions}")
    values = np.zeros(subdomains.mesh.n_vertices)
    values[idx.closed(m)] = 1.0
    zero = np.zeros(subdomains.mesh.n_vertices)
    chi, _ = subdomains.background(natural).solve(zero, values)
    if natural:
        # complete the function inside Neumann-side inclusions by harmonic extension
        v = chi.values.copy()
        for ell in natural:
            ext, _ = subdomains.inclusion_dirichlet(ell).solve(zero, v)
            inner = idx.interior[ell]
            v[inner] = ext.values[inner]
        chi = FEFunction(subdomains.mesh, v)
    return chi


def assemble_a_geom(chis: Sequence[FEFunction], subdomains: Subdomains) -> np.ndarray:
    k0 = subdomains.stiffness(0)
    x = np.column_stack([c.values for c in chis]) if chis else np.zeros((subdomains.mesh.n_vertices, 0))
    a = x.T @ (k0 @ x)
    return 0.5 * (a + a.T)


def build_basis(subdomains: Subdomains, inclusions: Sequence[int] | None = None, natural: Sequence[int] = ()) -> HarmonicBasis:
    """Characteristic functions for ``inclusions`` (default: all) and the factored ``A_geom``."""
    if inclusions is None:
        inclusions = [m for m in range(1, subdomains.n_inclusions + 1) if m not in natural]
    inclusions = tuple(int(m) for m in inclusions)
    natural = tuple(sorted(int(m) for m in natural))
    chis = tuple(compute_chi(subdomains, m, natural) for m in inclusions)
    a = assemble_a_geom(chis, subdomains)
    try:
        cho = sla.cho_factor(a) if len(a) else (a, False)
    except np.linalg.LinAlgError as exc:
        raise NotSPD(f"A_geom is not positive definite: {exc}") from None
    return HarmonicBasis(subdomains, inclusions, chis, a, cho, natural)


def solve_constants(basis: HarmonicBasis, rhs: Sequence[float]) -> np.ndarray:
    """Solve ``A_geom X = rhs`` with the cached Cholesky factor."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (basis.size,):
        raise ValueError(f"rhs must have length {basis.size}")
    if not np.all(np.isfinite(rhs)):
        raise ValueError("rhs must be finite")
    if basis.size == 0:
        return np.zeros(0)
    return sla.cho_solve(basis.cho, rhs)
