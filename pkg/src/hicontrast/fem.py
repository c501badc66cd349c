"""P1 finite elements on tagged triangular meshes.

All integrals are exact for piecewise-linear functions and piecewise-constant
forcing: gradients are constant per triangle and the mass matrix uses the
exact barycentric weights.
"""

from __future__ import annotations

import math
import threading
import weakref
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import IncompatibleData, MeshMismatch, MissingBoundaryData, NotSPD, ParseError, SolverDiverged
from .mesh import Mesh, SubdomainIndex, classify, edge_keys

DEFAULT_TOL = 1e-12
DEFAULT_COMPAT = 1e-10
NOISE = 64 * np.finfo(float).eps


# --------------------------------------------------------------------------
# data types

@dataclass(frozen=True, eq=False)
class FEFunction:
    """Nodal coefficient vector of a continuous P1 function."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if len(v) != self.mesh.n_vertices:
            raise ValueError(f"expected {self.mesh.n_vertices} nodal values, got {len(v)}")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite nodal values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def _other(self, other):
        if isinstance(other, FEFunction):
            if not self.mesh.same_as(other.mesh):
                raise MeshMismatch("functions live on different meshes")
            return other.values
        return other

    def __add__(self, other):
        return FEFunction(self.mesh, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return FEFunction(self.mesh, self.values - self._other(other))

    def __neg__(self):
        return FEFunction(self.mesh, -self.values)

    def __mul__(self, scalar: float):
        return FEFunction(self.mesh, float(scalar) * self.values)

    __rmul__ = __mul__

    def __call__(self, x: float, y: float) -> float:
        """Evaluate by barycentric interpolation in the containing triangle."""
        p = self.mesh.vertices[self.mesh.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        rx, ry = x - p[:, 0, 0], y - p[:, 0, 1]
        l1 = (rx * d2[:, 1] - ry * d2[:, 0]) / det
        l2 = (d1[:, 0] * ry - d1[:, 1] * rx) / det
        l0 = 1.0 - l1 - l2
        lam = np.column_stack([l0, l1, l2])
        inside = np.flatnonzero(lam.min(axis=1) >= -1e-12)
        if len(inside) == 0:
            raise ValueError(f"point ({x}, {y}) is outside the mesh")
        k = inside[0]
        return float(lam[k] @ self.values[self.mesh.triangles[k]])


@dataclass(frozen=True)
class PiecewiseData:
    """Constant forcing per subdomain and an affine boundary datum.

    ``forcing[m]`` is ``f`` on ``D_m``; ``g = (g0, g1, g2)`` means
    ``g(x, y) = g0 + g1 x + g2 y``.
    """

    forcing: tuple = (0.0,)
    g: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        f = tuple(float(v) for v in self.forcing)
        g = tuple(float(v) for v in self.g)
        if len(g) != 3:
            raise ValueError("g needs three affine coefficients")
        if not all(math.isfinite(v) for v in f + g):
            raise ValueError("data must be finite")
        object.__setattr__(self, "forcing", f)
        object.__setattr__(self, "g", g)

    def f(self, m: int) -> float:
        return self.forcing[m] if m < len(self.forcing) else 0.0

    def boundary_values(self, points: np.ndarray) -> np.ndarray:
        g0, g1, g2 = self.g
        return g0 + g1 * points[:, 0] + g2 * points[:, 1]


@dataclass
class SolveReport:
    iterations: int
    residual: float
    compatibility_defect: float | None = None


# --------------------------------------------------------------------------
# assembly

_geometry_cache: "weakref.WeakKeyDictionary[Mesh, tuple]" = weakref.WeakKeyDictionary()


def _geometry(mesh: Mesh):
    """Triangle areas and P1 basis gradients, shape (T,) and (T, 3, 2)."""
    hit = _geometry_cache.get(mesh)
    if hit is None:
        p = mesh.vertices[mesh.triangles]
        area = mesh.triangle_areas()
        # grad phi_i = rot90(edge opposite to vertex i) / (2 area)
        e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
        grads = np.stack([-e[..., 1], e[..., 0]], axis=-1) / (2.0 * area[:, None, None])
        hit = (area, grads)
        _geometry_cache[mesh] = hit
    return hit


_element_cache: "weakref.WeakKeyDictionary[Mesh, np.ndarray]" = weakref.WeakKeyDictionary()


def element_stiffness(mesh: Mesh) -> np.ndarray:
    """Unit-weight element matrices, shape (T, 3, 3); cached and read-only."""
    hit = _element_cache.get(mesh)
    if hit is None:
        area, grads = _geometry(mesh)
        hit = area[:, None, None] * np.einsum("tik,tjk->tij", grads, grads)
        hit.flags.writeable = False
        _element_cache[mesh] = hit
    return hit


_pattern_cache: "weakref.WeakKeyDictionary[Mesh, tuple]" = weakref.WeakKeyDictionary()


def _pattern(mesh: Mesh):
    """CSR structure of the full P1 matrix plus the slot of every element entry."""
    hit = _pattern_cache.get(mesh)
    if hit is None:
        n = mesh.n_vertices
        t = mesh.triangles.astype(np.int64)
        key = (np.repeat(t, 3, axis=1) * n + np.tile(t, (1, 3))).ravel()
        unique, slot = np.unique(key, return_inverse=True)
        indptr = np.searchsorted(unique // n, np.arange(n + 1))
        hit = (slot.reshape(-1, 9), unique % n, indptr)
        _pattern_cache[mesh] = hit
    return hit


def _scatter(mesh, local, scale):
    n = mesh.n_vertices
    slot, indices, indptr = _pattern(mesh)
    keep = np.flatnonzero(scale != 0.0)
    data = np.bincount(
        slot[keep].ravel(), weights=(scale[keep, None, None] * local[keep]).ravel(), minlength=len(indices)
    )
    a = sp.csr_array((data, indices.copy(), indptr.copy()), shape=(n, n))
    if len(keep) < len(scale):
        a.eliminate_zeros()
    return a


def assemble_stiffness(mesh: Mesh, weights: Sequence[float]) -> sp.csr_array:
    """Weighted P1 stiffness ``sum_m weights[m] * int_{D_m} grad phi_p . grad phi_q``.

    A zero weight drops the subdomain, which gives subdomain-local forms.
    """
    w = np.asarray(weights, dtype=float)
    if len(w) != mesh.n_inclusions + 1:
        raise ValueError(f"need {mesh.n_inclusions + 1} weights, got {len(w)}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and non-negative")
    return _scatter(mesh, element_stiffness(mesh), w[mesh.tags])


def subdomain_weights(mesh: Mesh, tags: Iterable[int]) -> np.ndarray:
    w = np.zeros(mesh.n_inclusions + 1)
    w[list(tags)] = 1.0
    return w


def mass_matrix(mesh: Mesh) -> sp.csr_array:
    area, _ = _geometry(mesh)
    local = np.broadcast_to((np.ones((3, 3)) + np.eye(3)) / 12.0, (len(area), 3, 3))
    return _scatter(mesh, local, area)


def assemble_load(mesh: Mesh, data: PiecewiseData, region: Iterable[int] | None = None) -> np.ndarray:
    """``int_{D_m} f_m phi_p`` summed over the subdomains in ``region`` (all by default)."""
    area, _ = _geometry(mesh)
    region = range(mesh.n_inclusions + 1) if region is None else region
    f = np.zeros(mesh.n_inclusions + 1)
    for m in region:
        f[m] = data.f(m)
    per_tri = f[mesh.tags] * area / 3.0
    return np.bincount(mesh.triangles.ravel(), weights=np.repeat(per_tri, 3), minlength=mesh.n_vertices)


def lumped_weights(mesh: Mesh, tag: int) -> np.ndarray:
    """``w_p = int_{D_tag} phi_p``; the discrete mean functional."""
    return assemble_load(mesh, PiecewiseData(forcing=[1.0 if m == tag else 0.0 for m in range(mesh.n_inclusions + 1)]), [tag])


# --------------------------------------------------------------------------
# linear solvers

class Factorization:
    """Reusable solver for one SPD sparse block.

    ``method="direct"`` keeps a SuperLU factorization with a few steps of
    iterative refinement whose residuals are accumulated in extended
    precision; ``method="cg"`` runs Jacobi-preconditioned conjugate
    gradients capped at ``50 * sqrt(N)`` iterations.

    The reported residual is ``|r| / |b|`` for CG.  For the direct method it is
    the normwise backward error ``|r| / (|A| |x| + |b|)`` of the Jacobi-scaled
    system: with contrast-sized matrix entries and an order-one load,
    ``|r| / |b|`` of any solution rounded to double precision is bounded below
    by roughly ``|A| |x| 1e-16 / |b|``.
    """

    def __init__(self, matrix, method: str = "direct", tol: float = DEFAULT_TOL):
        self.matrix = sp.csc_array(matrix)
        self.method = method
        self.tol = tol
        self.n = self.matrix.shape[0]
        if method == "direct":
            # symmetric Jacobi equilibration: rows of very different contrast get
            # comparable size, so the backward error is small row by row
            d = self.matrix.diagonal()
            if np.any(d <= 0):
                raise NotSPD("matrix has a non-positive diagonal entry")
            self._scale = 1.0 / np.sqrt(d)
            m = self.matrix
            cols = np.repeat(np.arange(self.n), np.diff(m.indptr))
            self._scaled = sp.csc_array((m.data * self._scale[m.indices] * self._scale[cols], m.indices, m.indptr), shape=m.shape)
            self._scaled_ext = self._scaled.astype(np.longdouble)
            self._norm = float(abs(self._scaled).sum(axis=1).max()) if self.n else 0.0
            self._scale_ext = self._scale.astype(np.longdouble)
            # unit diagonal and SPD: diagonal pivots are always acceptable
            self._lu = (
                spla.splu(self._scaled, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0, options={"SymmetricMode": True})
                if self.n
                else None
            )
        elif method == "cg":
            d = self.matrix.diagonal()
            self._jacobi = spla.LinearOperator(self.matrix.shape, matvec=lambda x: x / d)
        else:
            raise ValueError(f"unknown solver method {method!r}")

    def _backward_error(self, r, rhs, x) -> float:
        return float(np.max(np.abs(r)) / (self._norm * np.max(np.abs(x)) + np.max(np.abs(rhs))))

    def solve(self, rhs: np.ndarray) -> tuple[np.ndarray, SolveReport]:
        if self.n == 0:
            return np.zeros(0), SolveReport(0, 0.0)
        rhs = np.asarray(rhs, dtype=float)
        scale = np.linalg.norm(rhs)
        if scale == 0.0:
            return np.zeros(self.n), SolveReport(0, 0.0)
        if self.method == "direct":
            # accept a tiny double-precision backward error; otherwise refine
            # with residuals accumulated in extended precision
            b_fast = self._scale * rhs
            y_fast = self._lu.solve(b_fast)
            res = self._backward_error(b_fast - self._scaled @ y_fast, b_fast, y_fast)
            it = 1
            if res > self.tol * 1e-3:
                b = self._scale_ext * rhs
                y = y_fast.astype(np.longdouble)
                r = b - self._scaled_ext @ y
                res = self._backward_error(r, b, y)
            else:
                y = y_fast
            while res > self.tol * 1e-3 and it < 4:
                y_new = y + self._lu.solve(r.astype(float))
                r_new = b - self._scaled_ext @ y_new
                new = self._backward_error(r_new, b, y_new)
                it += 1
                if new >= res:
                    break
                y, r, res = y_new, r_new, new
            x = (self._scale * y).astype(float)
        else:
            count = [0]

            def tick(_):
                count[0] += 1

            maxiter = int(50 * math.sqrt(self.n)) + 1
            x, _ = spla.cg(self.matrix, rhs, rtol=self.tol, atol=0.0, maxiter=maxiter, M=self._jacobi, callback=tick)
            it = count[0]
            res = np.linalg.norm(rhs - self.matrix @ x) / scale
        report = SolveReport(it, float(res))
        if not res <= self.tol:
            raise SolverDiverged(f"relative residual {res:.3e} above tolerance {self.tol:.1e}", report)
        return x, report


def _region_nodes(mesh: Mesh, region: Iterable[int]):
    keep = np.isin(mesh.tags, list(region))
    tris = mesh.triangles[keep]
    nodes = np.unique(tris)
    e = tris[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2)
    key = edge_keys(e, mesh.n_vertices)
    _, first, counts = np.unique(key, return_index=True, return_counts=True)
    boundary = np.unique(e[first[counts == 1]])
    return nodes, boundary


class DirichletSolver:
    """Solve ``K u = b`` on the ``free`` nodes with all other values prescribed.

    The factorization of ``K[free, free]`` is built once and reused for every
    call to :meth:`solve`.
    """

    def __init__(self, mesh: Mesh, stiffness, free, *, method="direct", tol=DEFAULT_TOL):
        self.mesh = mesh
        self.free = np.asarray(free, dtype=np.int64)
        k = sp.csr_array(stiffness)
        self._rows = k[self.free]
        self.factor = Factorization(self._rows[:, self.free], method=method, tol=tol)

    def solve(self, load: np.ndarray, values: np.ndarray | None = None) -> tuple[FEFunction, SolveReport]:
        """``values`` supplies the prescribed data (entries at free nodes are ignored)."""
        n = self.mesh.n_vertices
        x = np.zeros(n) if values is None else np.array(values, dtype=float)
        x[self.free] = 0.0
        rhs = np.asarray(load, dtype=float)[self.free] - self._rows @ x
        sol, report = self.factor.solve(rhs)
        x[self.free] = sol
        return FEFunction(self.mesh, x), report


def solve_dirichlet(
    mesh: Mesh,
    region: Iterable[int],
    stiffness,
    load: np.ndarray,
    dirichlet: Mapping[int, float],
    *,
    natural: Iterable[int] = (),
    method: str = "direct",
    tol: float = DEFAULT_TOL,
) -> tuple[FEFunction, SolveReport]:
    """One-off Dirichlet (or mixed) solve on the subdomains listed in ``region``.

    Every node on the boundary of the region must appear in ``dirichlet``
    unless it is listed in ``natural``.  Nodes outside the region are zero in
    the result.
    """
    nodes, boundary = _region_nodes(mesh, region)
    constrained = np.array(sorted(dirichlet), dtype=np.int64)
    missing = np.setdiff1d(boundary, np.union1d(constrained, np.asarray(list(natural), dtype=np.int64)))
    if len(missing):
        raise MissingBoundaryData(f"{len(missing)} boundary nodes lack Dirichlet data (first: {missing[0]})")
    free = np.setdiff1d(nodes, constrained)
    values = np.zeros(mesh.n_vertices)
    values[constrained] = [dirichlet[int(p)] for p in constrained]
    solver = DirichletSolver(mesh, stiffness, free, method=method, tol=tol)
    return solver.solve(load, values)


class NeumannSolver:
    """Mean-zero pure Neumann solve on one inclusion.

    The load ``r`` is first made exactly compatible by removing
    ``w sum(r) / sum(w)`` with ``w_p = int phi_p`` (this is the Lagrange
    multiplier of the mean-zero constraint).  One node is then pinned, which
    leaves a symmetric positive definite system, and the weighted mean is
    subtracted afterwards.  Loads whose relative sum exceeds
    ``compat_threshold`` raise ``IncompatibleData``.
    """

    def __init__(self, mesh: Mesh, stiffness, nodes, weights, *, tol=DEFAULT_TOL, compat_threshold=DEFAULT_COMPAT):
        self.mesh = mesh
        self.nodes = np.asarray(nodes, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=float)[self.nodes]
        self.compat_threshold = compat_threshold
        self.tol = tol
        k = sp.csr_array(stiffness)[self.nodes][:, self.nodes]
        self.matrix = sp.csc_array(k)
        self._free = np.arange(1, len(self.nodes))
        self.factor = Factorization(k[self._free][:, self._free], tol=tol)

    def solve(self, load: np.ndarray, reference: float = 0.0) -> tuple[FEFunction, SolveReport]:
        """Solve for ``load``; ``reference`` is the size of the terms that were summed into it.

        A load below round-off relative to ``reference`` is cancellation noise
        (for instance the flux of an exact constant) and is treated as zero.
        """
        r = np.asarray(load, dtype=float)[self.nodes]
        norm = np.linalg.norm(r)
        if norm <= NOISE * reference:
            norm = 0.0
        defect = abs(r.sum()) / norm if norm > 0 else 0.0
        if defect > self.compat_threshold:
            raise IncompatibleData(f"Neumann data violate compatibility (defect {defect:.3e})", defect)
        out = np.zeros(self.mesh.n_vertices)
        if norm == 0.0:
            return FEFunction(self.mesh, out), SolveReport(0, 0.0, defect)
        r = r - self.weights * (r.sum() / self.weights.sum())
        u = np.zeros(len(self.nodes))
        u[self._free], inner = self.factor.solve(r[self._free])
        res = np.linalg.norm(r - self.matrix @ u) / norm
        report = SolveReport(inner.iterations, float(res), defect)
        if not res <= self.tol:
            raise SolverDiverged(f"Neumann solve residual {res:.3e} above tolerance", report)
        u -= (self.weights @ u) / self.weights.sum()
        out[self.nodes] = u
        return FEFunction(self.mesh, out), report


def solve_neumann_mean_zero(mesh: Mesh, m: int, load: np.ndarray, **kwargs) -> tuple[FEFunction, SolveReport]:
    """Mean-zero Neumann solve on inclusion ``m`` with unit coefficient."""
    index = classify(mesh)
    return NeumannSolver(
        mesh, assemble_stiffness(mesh, subdomain_weights(mesh, [m])), index.closed(m), lumped_weights(mesh, m), **kwargs
    ).solve(load)


# --------------------------------------------------------------------------
# subdomain operator cache

class Subdomains:
    """Contrast-independent operators of a mesh, built lazily and cached.

    Holds the unit-weight stiffness of every subdomain, the mass matrix and
    reusable factorizations for the background and each inclusion.  Safe to
    share across threads.
    """

    def __init__(self, mesh: Mesh, *, method="direct", tol=DEFAULT_TOL, compat_threshold=DEFAULT_COMPAT):
        self.mesh = mesh
        self.index: SubdomainIndex = classify(mesh)
        self.method = method
        self.tol = tol
        self.compat_threshold = compat_threshold
        self._cache = {}
        self._lock = threading.RLock()

    @property
    def n_inclusions(self) -> int:
        return self.index.n_inclusions

    def _cached(self, key, build):
        with self._lock:
            if key not in self._cache:
                self._cache[key] = build()
            return self._cache[key]

    def stiffness(self, m: int | None = None):
        """Unit-weight stiffness of ``D_m``, or of the whole domain for ``None``."""
        if m is None:
            return self._cached(("K",), lambda: assemble_stiffness(self.mesh, np.ones(self.n_inclusions + 1)))
        return self._cached(("K", m), lambda: assemble_stiffness(self.mesh, subdomain_weights(self.mesh, [m])))

    def mass(self):
        return self._cached(("M",), lambda: mass_matrix(self.mesh))

    def load(self, data: PiecewiseData, m: int) -> np.ndarray:
        return assemble_load(self.mesh, data, [m])

    def background(self, natural: Iterable[int] = ()) -> DirichletSolver:
        """Background solver; interfaces of inclusions in ``natural`` stay free (Neumann)."""
        natural = tuple(sorted(set(natural)))

        def build():
            free = np.concatenate([self.index.interior[0], *[self.index.interface[m] for m in natural]])
            return DirichletSolver(self.mesh, self.stiffness(0), np.sort(free), method=self.method, tol=self.tol)

        return self._cached(("bg", natural), build)

    def inclusion_dirichlet(self, m: int) -> DirichletSolver:
        return self._cached(
            ("dir", m),
            lambda: DirichletSolver(self.mesh, self.stiffness(m), self.index.interior[m], method=self.method, tol=self.tol),
        )

    def inclusion_neumann(self, m: int) -> NeumannSolver:
        return self._cached(
            ("neu", m),
            lambda: NeumannSolver(
                self.mesh,
                self.stiffness(m),
                self.index.closed(m),
                lumped_weights(self.mesh, m),
                tol=self.tol,
                compat_threshold=self.compat_threshold,
            ),
        )

    def residual_flux(self, u: FEFunction | np.ndarray, m: int, data: PiecewiseData | None = None) -> np.ndarray:
        """``int_{D_m} grad u . grad phi_p - int_{D_m} f phi_p`` for every node p.

        At the boundary nodes of ``D_m`` this is the weak outward flux of ``u``
        seen from ``D_m``; it vanishes at nodes where ``u`` solves the subdomain
        problem.
        """
        v = u.values if isinstance(u, FEFunction) else np.asarray(u)
        r = self.stiffness(m) @ v
        if data is not None:
            r = r - self.load(data, m)
        return r

    def flux_scale(self, u, source: int, target: int, data: PiecewiseData | None = None) -> float:
        """Norm of the magnitudes summed into :meth:`interface_flux` (round-off reference)."""
        v = u.values if isinstance(u, FEFunction) else np.asarray(u)
        k = self._cached(("absK", source), lambda: abs(self.stiffness(source)))
        r = k @ np.abs(v)
        if data is not None:
            r = r + np.abs(self.load(data, source))
        return float(np.linalg.norm(r[self.index.interface[target]]))

    def interface_flux(self, u, source: int, target: int, data: PiecewiseData | None = None) -> np.ndarray:
        """Weak flux of ``u`` from subdomain ``source`` on ``∂D_target``; zero elsewhere."""
        r = self.residual_flux(u, source, data)
        out = np.zeros_like(r)
        nodes = self.index.interface[target]
        out[nodes] = r[nodes]
        return out


def weak_flux(
    u: FEFunction, source: int, target: int, data: PiecewiseData | None = None, subdomains: Subdomains | None = None
) -> tuple[np.ndarray, np.ndarray, float]:
    """Weak interface flux of ``u`` from subdomain ``source`` across ``∂D_target``.

    Returns the interface nodes, the flux functional at those nodes and its
    total.  Computed as a residual, never from pointwise gradient traces.
    """
    sub = subdomains if subdomains is not None else Subdomains(u.mesh)
    nodes = sub.index.interface[target]
    values = sub.residual_flux(u, source, data)[nodes]
    return nodes, values, float(values.sum())


# --------------------------------------------------------------------------
# norms

_norm_cache: "weakref.WeakKeyDictionary[Mesh, tuple]" = weakref.WeakKeyDictionary()


def _norm_operators(mesh):
    hit = _norm_cache.get(mesh)
    if hit is None:
        hit = mass_matrix(mesh)
        _norm_cache[mesh] = hit
    return hit


def h1_seminorm(u: FEFunction) -> float:
    """``sqrt(u^T K u)``, evaluated elementwise from nodal differences.

    Summing ``area |grad u|^2`` with ``grad u = (u_1 - u_0) grad phi_1 +
    (u_2 - u_0) grad phi_2`` avoids the cancellation of the assembled quadratic
    form, so constants give exactly zero.
    """
    area, grads = _geometry(u.mesh)
    v = u.values[u.mesh.triangles]
    g = (v[:, 1] - v[:, 0])[:, None] * grads[:, 1] + (v[:, 2] - v[:, 0])[:, None] * grads[:, 2]
    return math.sqrt(float(area @ np.einsum("tk,tk->t", g, g)))


def l2_norm(u: FEFunction) -> float:
    m = _norm_operators(u.mesh)
    return math.sqrt(max(float(u.values @ (m @ u.values)), 0.0))


def h1_norm(u: FEFunction) -> float:
    return math.sqrt(h1_seminorm(u) ** 2 + l2_norm(u) ** 2)


# --------------------------------------------------------------------------
# serialization

def save_function(u: FEFunction) -> str:
    return "".join(f"{p} {v!r}\n" for p, v in enumerate(u.values.tolist()))


def load_function(text: str, mesh: Mesh) -> FEFunction:
    values = np.full(mesh.n_vertices, np.nan)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError("expected '<node_index> <value>'", lineno)
        try:
            p, v = int(parts[0]), float(parts[1])
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if not 0 <= p < mesh.n_vertices:
            raise ParseError(f"node index {p} out of range", lineno)
        values[p] = v
    if np.isnan(values).any():
        raise ParseError("missing nodal values", None)
    return FEFunction(mesh, values)
