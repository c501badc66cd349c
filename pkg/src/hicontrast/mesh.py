"""Conforming triangular meshes with exactly resolved inclusion boundaries.

Triangles carry a subdomain tag (0 for the background, ``m >= 1`` for
inclusion ``m``).  Boundary edges carry ``OUTER`` (-1) on the outer boundary
and ``m`` on the interface of inclusion ``m``.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import shapely
import triangle
from scipy.sparse import coo_array
from scipy.sparse.csgraph import connected_components

from .errors import DegenerateGeometry, InclusionOverlap, InvalidTopology, ParseError

OUTER = -1
MIN_ANGLE = 20.0


class Point2(NamedTuple):
    x: float
    y: float


def _readonly(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable triangulation.

    Attributes
    ----------
    vertices : (N, 2) float array
    triangles : (T, 3) int array, counterclockwise
    tags : (T,) int array of subdomain tags
    boundary_edges : (E, 2) int array
    edge_tags : (E,) int array, ``OUTER`` or an inclusion index
    """

    vertices: np.ndarray
    triangles: np.ndarray
    tags: np.ndarray
    boundary_edges: np.ndarray
    edge_tags: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vertices", _readonly(self.vertices, float).reshape(-1, 2))
        object.__setattr__(self, "triangles", _readonly(self.triangles, np.int64).reshape(-1, 3))
        object.__setattr__(self, "tags", _readonly(self.tags, np.int64).reshape(-1))
        object.__setattr__(self, "boundary_edges", _readonly(self.boundary_edges, np.int64).reshape(-1, 2))
        object.__setattr__(self, "edge_tags", _readonly(self.edge_tags, np.int64).reshape(-1))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_inclusions(self) -> int:
        return int(self.tags.max()) if len(self.tags) else 0

    def triangle_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def area(self, tag=None) -> float:
        a = self.triangle_areas()
        if tag is not None:
            a = a[self.tags == tag]
        return float(a.sum())

    def same_as(self, other: "Mesh") -> bool:
        if self is other:
            return True
        return all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("vertices", "triangles", "tags", "boundary_edges", "edge_tags")
        )

    def retagged(self, mapping: dict[int, int]) -> "Mesh":
        """Copy of the mesh with subdomain tags renamed; interfaces are rederived.

        Mapping an inclusion to 0 merges it into the background.
        """
        tags = np.array([mapping.get(int(t), int(t)) for t in self.tags])
        edges, etags = _boundary_edges(self.triangles, tags)
        return Mesh(self.vertices, self.triangles, tags, edges, etags)


@dataclass(frozen=True, eq=False)
class SubdomainIndex:
    """Node sets of each subdomain, ascending node order.

    ``interior[m]`` holds nodes of ``D_m`` that lie on no interface and not on
    the outer boundary; ``interface[m]`` (m >= 1) the nodes of ``∂D_m``;
    ``outer`` the nodes of ``∂D``.  ``interface[0]`` is empty.
    """

    n_inclusions: int
    interior: tuple
    interface: tuple
    outer: np.ndarray

    def closed(self, m: int) -> np.ndarray:
        """All nodes of the closure of ``D_m`` (for m >= 1), or of ``D_0``."""
        if m == 0:
            parts = [self.interior[0], self.outer, *self.interface[1:]]
        else:
            parts = [self.interior[m], self.interface[m]]
        return np.unique(np.concatenate(parts)).astype(np.int64)

    def all_interface(self) -> np.ndarray:
        return np.unique(np.concatenate([np.empty(0, np.int64), *self.interface[1:]])).astype(np.int64)


# --------------------------------------------------------------------------
# geometry helpers

def rectangle(x0: float, y0: float, x1: float, y1: float) -> np.ndarray:
    return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float)


def regular_polygon(center: Sequence[float], radius: float, n: int = 64, phase: float = 0.0) -> np.ndarray:
    """Inscribed n-gon approximating a circle, counterclockwise."""
    t = phase + 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)])


def polygon_area(poly) -> float:
    p = np.asarray(poly, dtype=float)
    q = np.roll(p, -1, axis=0)
    return 0.5 * float(np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]))


def _as_ccw(poly) -> np.ndarray:
    p = np.asarray(poly, dtype=float).reshape(-1, 2)
    return p if polygon_area(p) > 0 else p[::-1].copy()


def _validate_polygon(poly, what):
    if len(poly) < 3 or not np.all(np.isfinite(poly)):
        raise DegenerateGeometry(f"{what}: need at least 3 finite vertices")
    shape = shapely.Polygon(poly)
    if not shape.is_valid or not shape.exterior.is_simple:
        raise DegenerateGeometry(f"{what}: polygon is self-intersecting")
    extent = np.ptp(poly, axis=0).max()
    if abs(polygon_area(poly)) <= 1e-10 * extent**2:
        raise DegenerateGeometry(f"{what}: polygon has near-zero area")
    return shape


def _split_edges(poly, h):
    out = []
    for a, b in zip(poly, np.roll(poly, -1, axis=0)):
        k = max(1, math.ceil(np.linalg.norm(b - a) / h - 1e-9))
        for j in range(k):
            out.append(a + (b - a) * (j / k))
    return np.array(out)


def edge_keys(edges, n):
    """Orientation-free integer key per edge, for fast 1-D ``np.unique``."""
    e = np.sort(edges, axis=1)
    return e[:, 0] * np.int64(n) + e[:, 1]


def _boundary_edges(triangles, tags):
    """Outer edges (used once) and interfaces (tag 0 on one side, m on the other)."""
    loc = np.array([[0, 1], [1, 2], [2, 0]])
    e = triangles[:, loc].reshape(-1, 2)
    owner = np.repeat(np.arange(len(triangles)), 3)
    n = int(triangles.max()) + 1 if len(triangles) else 0
    _, inv, counts = np.unique(edge_keys(e, n), return_inverse=True, return_counts=True)
    edges, etags = [], []
    once = counts[inv] == 1
    edges.append(e[once])
    etags.append(np.full(int(once.sum()), OUTER))
    # shared edges: find the partner of each half-edge
    twice = np.flatnonzero(counts[inv] == 2)
    order = twice[np.argsort(inv[twice], kind="stable")]
    first, second = order[0::2], order[1::2]
    t1, t2 = tags[owner[first]], tags[owner[second]]
    differ = t1 != t2
    # orient the interface edge as seen from the inclusion side
    inc_first = differ & (t1 != 0)
    inc_second = differ & (t1 == 0)
    edges.append(e[first[inc_first]])
    etags.append(t1[inc_first])
    edges.append(e[second[inc_second]])
    etags.append(t2[inc_second])
    edges = np.concatenate(edges) if edges else np.empty((0, 2), np.int64)
    etags = np.concatenate(etags)
    order = np.lexsort((edges[:, 1], edges[:, 0], etags))
    return edges[order], etags[order]


def _min_angles(vertices, triangles):
    p = vertices[triangles]
    angles = []
    for i in range(3):
        u = p[:, (i + 1) % 3] - p[:, i]
        v = p[:, (i + 2) % 3] - p[:, i]
        c = np.sum(u * v, axis=1) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
        angles.append(np.degrees(np.arccos(np.clip(c, -1.0, 1.0))))
    return np.min(angles, axis=0)


def circumdiameters(mesh: Mesh) -> np.ndarray:
    p = mesh.vertices[mesh.triangles]
    la = np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
    lb = np.linalg.norm(p[:, 2] - p[:, 1], axis=1)
    lc = np.linalg.norm(p[:, 0] - p[:, 2], axis=1)
    return la * lb * lc / (2.0 * mesh.triangle_areas())


def generate(domain, inclusions=(), target_h: float = 0.05, min_angle: float = MIN_ANGLE) -> Mesh:
    """Constrained Delaunay mesh of ``domain`` with every inclusion edge resolved.

    Parameters
    ----------
    domain : (n, 2) array_like
        Outer polygon (rectangle or convex polygon).
    inclusions : sequence of (k, 2) array_like
        Simple polygons strictly inside ``domain`` with pairwise disjoint closures.
        Inclusion ``m`` (1-based) is ``inclusions[m - 1]``.
    target_h : float
        Target edge length; the maximum circumdiameter is kept below ``2 * target_h``.
    """
    if not target_h > 0:
        raise ValueError("target_h must be positive")
    dom = _as_ccw(domain)
    dom_shape = _validate_polygon(dom, "domain")
    incs = [_as_ccw(p) for p in inclusions]
    shapes = [_validate_polygon(p, f"inclusion {m + 1}") for m, p in enumerate(incs)]
    for m, s in enumerate(shapes):
        if not dom_shape.contains(s) or dom_shape.exterior.distance(s) <= 0.0:
            raise InclusionOverlap(f"inclusion {m + 1} is not strictly inside the domain")
        for k in range(m):
            if shapes[k].distance(s) <= 0.0:
                raise InclusionOverlap(f"inclusions {k + 1} and {m + 1} touch or overlap")

    polys = [_split_edges(p, target_h) for p in [dom, *incs]]
    verts, segs, off = [], [], 0
    for p in polys:
        n = len(p)
        verts.append(p)
        segs.append(np.column_stack([np.arange(n), (np.arange(n) + 1) % n]) + off)
        off += n
    pslg = {"vertices": np.vstack(verts), "segments": np.vstack(segs)}

    max_area = math.sqrt(3.0) / 4.0 * target_h**2
    for _ in range(8):
        # fixed-point: the switch parser does not understand exponents
        out = triangle.triangulate(pslg, f"pq{min_angle:g}a{max_area:.20f}Q")
        tris = out["triangles"]
        pts = out["vertices"]
        probe = Mesh(pts, tris, np.zeros(len(tris)), np.empty((0, 2)), np.empty(0))
        if circumdiameters(probe).max() <= 2.0 * target_h:
            break
        max_area *= 0.5
    else:
        raise DegenerateGeometry("could not reach the requested mesh size")

    # orient counterclockwise
    p = pts[tris]
    cross = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    tris = np.where((cross < 0)[:, None], tris[:, [0, 2, 1]], tris)
    if _min_angles(pts, tris).min() < min_angle - 1e-6:
        raise DegenerateGeometry(f"mesh quality below the {min_angle} degree minimum angle floor")

    centroids = pts[tris].mean(axis=1)
    tags = np.zeros(len(tris), dtype=np.int64)
    for m, s in enumerate(shapes, start=1):
        tags[shapely.contains_xy(s, centroids[:, 0], centroids[:, 1])] = m
    edges, etags = _boundary_edges(tris, tags)
    mesh = Mesh(pts, tris, tags, edges, etags)
    check_topology(mesh)
    return mesh


# --------------------------------------------------------------------------
# topology

def _triangle_graph(triangles, keep):
    loc = np.array([[0, 1], [1, 2], [2, 0]])
    idx = np.flatnonzero(keep)
    e = triangles[idx][:, loc].reshape(-1, 2)
    owner = np.repeat(np.arange(len(idx)), 3)
    _, inv = np.unique(edge_keys(e, int(triangles.max()) + 1), return_inverse=True)
    order = np.argsort(inv, kind="stable")
    same = inv[order][1:] == inv[order][:-1]
    a, b = owner[order][:-1][same], owner[order][1:][same]
    n = len(idx)
    return coo_array((np.ones(len(a)), (a, b)), shape=(n, n))


def check_topology(mesh: Mesh) -> None:
    """Raise ``InvalidTopology`` unless all mesh invariants hold."""
    v, t, tags = mesh.vertices, mesh.triangles, mesh.tags
    if len(t) == 0 or len(v) < 3:
        raise InvalidTopology("mesh is empty")
    if not np.all(np.isfinite(v)):
        raise InvalidTopology("non-finite vertex coordinates")
    if t.min() < 0 or t.max() >= len(v):
        raise InvalidTopology("triangle references a missing vertex")
    if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
        raise InvalidTopology("triangle with repeated vertices")
    if np.any(mesh.triangle_areas() <= 0):
        raise InvalidTopology("triangle not counterclockwise or degenerate")
    if tags.min() < 0:
        raise InvalidTopology("negative subdomain tag")
    M = mesh.n_inclusions
    present = set(np.unique(tags).tolist())
    if present != set(range(M + 1)):
        raise InvalidTopology("subdomain tags must be 0..M with every tag present")

    key = edge_keys(t[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2), len(v))
    _, inv, counts = np.unique(key, return_inverse=True, return_counts=True)
    if counts.max() > 2:
        raise InvalidTopology("edge shared by more than two triangles")
    owner = np.repeat(np.arange(len(t)), 3)
    order = np.argsort(inv, kind="stable")
    same = inv[order][1:] == inv[order][:-1]
    ta = tags[owner[order][:-1][same]]
    tb = tags[owner[order][1:][same]]
    if np.any((ta != tb) & (ta != 0) & (tb != 0)):
        raise InvalidTopology("two inclusions share an edge")
    outer_tri = owner[counts[inv] == 1]
    if np.any(tags[outer_tri] != 0):
        raise InvalidTopology("inclusion triangle on the outer boundary")

    edges, etags = _boundary_edges(t, tags)
    given = sorted(zip(np.sort(mesh.boundary_edges, axis=1).tolist(), mesh.edge_tags.tolist()))
    derived = sorted(zip(np.sort(edges, axis=1).tolist(), etags.tolist()))
    if given != derived:
        raise InvalidTopology("boundary edge list does not match the triangle tags")

    # node-level separation: a node may touch the background and at most one inclusion
    used = np.zeros(len(v), bool)
    used[t.ravel()] = True
    if not used.all():
        raise InvalidTopology("unused vertices")
    pk = np.unique(t.ravel() * np.int64(M + 1) + np.repeat(tags, 3))
    pairs = np.column_stack([pk // (M + 1), pk % (M + 1)])
    inc_pairs = pairs[pairs[:, 1] != 0]
    n_inc = np.bincount(inc_pairs[:, 0], minlength=len(v))
    if np.any(n_inc > 1):
        raise InvalidTopology(f"node {int(np.argmax(n_inc > 1))} touches several inclusions")
    inc_of = np.zeros(len(v), np.int64)
    inc_of[inc_pairs[:, 0]] = inc_pairs[:, 1]
    touches_bg = np.zeros(len(v), bool)
    touches_bg[pairs[pairs[:, 1] == 0, 0]] = True
    on_outer = np.zeros(len(v), bool)
    on_outer[edges[etags == OUTER].ravel()] = True
    if np.any(on_outer & (inc_of > 0)):
        raise InvalidTopology("inclusion node on the outer boundary")
    on_own_iface = np.zeros(len(v), bool)
    iface = edges[etags > 0]
    for k in range(2):
        hit = inc_of[iface[:, k]] == etags[etags > 0]
        on_own_iface[iface[hit, k]] = True
    bad = (inc_of > 0) & touches_bg & ~on_own_iface
    if np.any(bad):
        raise InvalidTopology(f"node {int(np.argmax(bad))} pinches an inclusion against the background")

    for m in range(M + 1):
        graph = _triangle_graph(t, tags == m)
        n, _ = connected_components(graph, directed=False)
        if n != 1:
            what = "background" if m == 0 else f"inclusion {m}"
            raise InvalidTopology(f"{what} is not edge-connected")


_index_cache: "weakref.WeakKeyDictionary[Mesh, SubdomainIndex]" = weakref.WeakKeyDictionary()


def classify(mesh: Mesh) -> SubdomainIndex:
    """Node sets per subdomain; raises ``InvalidTopology`` for invalid meshes.

    The result is cached per mesh object (meshes are immutable).
    """
    hit = _index_cache.get(mesh)
    if hit is not None:
        return hit
    check_topology(mesh)
    M = mesh.n_inclusions
    edges, etags = mesh.boundary_edges, mesh.edge_tags
    outer = np.unique(edges[etags == OUTER])
    interface = [np.empty(0, np.int64)]
    for m in range(1, M + 1):
        interface.append(np.unique(edges[etags == m]))
    on_boundary = np.zeros(mesh.n_vertices, bool)
    on_boundary[outer] = True
    for m in range(1, M + 1):
        on_boundary[interface[m]] = True
    interior = []
    for m in range(M + 1):
        nodes = np.unique(mesh.triangles[mesh.tags == m])
        interior.append(nodes[~on_boundary[nodes]])
    as_ro = lambda a: _readonly(a, np.int64)  # noqa: E731
    index = SubdomainIndex(
        M,
        tuple(as_ro(a) for a in interior),
        tuple(as_ro(a) for a in interface),
        as_ro(outer),
    )
    _index_cache[mesh] = index
    return index


# --------------------------------------------------------------------------
# text format

def save(mesh: Mesh) -> str:
    lines = [f"# mesh: {mesh.n_vertices} vertices, {len(mesh.triangles)} triangles, {mesh.n_inclusions} inclusions"]
    lines += [f"v {x!r} {y!r}" for x, y in mesh.vertices.tolist()]
    lines += [f"t {i} {j} {k} {g}" for (i, j, k), g in zip(mesh.triangles.tolist(), mesh.tags.tolist())]
    lines += [f"be {i} {j} {g}" for (i, j), g in zip(mesh.boundary_edges.tolist(), mesh.edge_tags.tolist())]
    return "\n".join(lines) + "\n"


def load(text: str) -> Mesh:
    verts, tris, tags, edges, etags = [], [], [], [], []
    arity = {"v": 2, "t": 4, "be": 3}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, *fields = line.split()
        if kind not in arity:
            raise ParseError(f"unknown record {kind!r}", lineno)
        if len(fields) != arity[kind]:
            raise ParseError(f"record {kind!r} expects {arity[kind]} fields", lineno)
        try:
            if kind == "v":
                x, y = float(fields[0]), float(fields[1])
                if not (math.isfinite(x) and math.isfinite(y)):
                    raise ParseError("non-finite coordinate", lineno)
                verts.append((x, y))
            elif kind == "t":
                i, j, k, g = map(int, fields)
                tris.append((i, j, k))
                tags.append(g)
            else:
                i, j, g = map(int, fields)
                edges.append((i, j))
                etags.append(g)
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
    if not verts or not tris:
        raise ParseError("no vertices or triangles found", None)
    n = len(verts)
    for lineno_idx, tri in enumerate(tris):
        if min(tri) < 0 or max(tri) >= n:
            raise ParseError(f"triangle {lineno_idx} references a missing vertex", _line_of(text, "t", lineno_idx))
    for idx, e in enumerate(edges):
        if min(e) < 0 or max(e) >= n:
            raise ParseError(f"boundary edge {idx} references a missing vertex", _line_of(text, "be", idx))
    return Mesh(
        np.array(verts, dtype=float),
        np.array(tris, dtype=np.int64),
        np.array(tags, dtype=np.int64),
        np.array(edges, dtype=np.int64).reshape(-1, 2),
        np.array(etags, dtype=np.int64),
    )


def _line_of(text, kind, idx):
    count = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split("#", 1)[0].split()
        if parts and parts[0] == kind:
            count += 1
            if count == idx:
                return lineno
    return None
