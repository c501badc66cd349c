"""Shared meshes and analytic reference solutions."""

import math

import numpy as np
import pytest

from hicontrast import mesh as hmesh
from hicontrast.fem import PiecewiseData, Subdomains

R_IN = 0.5
PROBE = (0.75, 0.0)


def disk(cx, cy, r, n=64):
    return hmesh.regular_polygon((cx, cy), r, n)


@pytest.fixture(scope="session")
def annulus():
    """Unit disk with a concentric inclusion of radius 1/2, h = 0.05."""
    return hmesh.generate(disk(0, 0, 1), [disk(0, 0, R_IN)], 0.05)


@pytest.fixture(scope="session")
def annulus_sub(annulus):
    return Subdomains(annulus)


@pytest.fixture(scope="session")
def square_inclusion():
    """Unit square with inclusion [0.4, 0.6]^2, h = 0.05."""
    return hmesh.generate(hmesh.rectangle(0, 0, 1, 1), [hmesh.rectangle(0.4, 0.4, 0.6, 0.6)], 0.05)


@pytest.fixture(scope="session")
def two_disks():
    """Rectangle [0,2]x[0,1] with disks of radius 1/4 at (0.5, 0.5) and (1.5, 0.5)."""
    return hmesh.generate(hmesh.rectangle(0, 0, 2, 1), [disk(0.5, 0.5, 0.25), disk(1.5, 0.5, 0.25)], 0.05)


@pytest.fixture(scope="session")
def unit_square():
    return hmesh.generate(hmesh.rectangle(0, 0, 1, 1), [], 0.1)


COS_THETA = PiecewiseData((0.0, 0.0), (0.0, 1.0, 0.0))
"""``g = x``, which equals ``cos(theta)`` on the unit circle."""


def annulus_high_limit(rho, r=R_IN):
    """Limit for a perfectly conducting core: ``(rho - r^2/rho) cos / (1 - r^2)`` at theta = 0."""
    return (rho - r * r / rho) / (1 - r * r)


def annulus_low_limit(rho, r=R_IN):
    """Limit for an insulating core: ``(rho + r^2/rho) cos / (1 + r^2)`` at theta = 0."""
    return (rho + r * r / rho) / (1 + r * r)


def annulus_finite_contrast(rho, kappa, r=R_IN):
    """Exact solution of ``-div(k grad u) = 0`` with k = kappa for rho < r, 1 outside, u = cos on rho = 1.

    Inside ``C rho cos``, outside ``(A rho + B / rho) cos`` with continuity of
    ``u`` and of ``k du/drho`` at ``rho = r`` and ``A + B = 1``.
    """
    m = np.array([[1.0, 1.0, 0.0], [r, 1.0 / r, -r], [1.0, -1.0 / r**2, -kappa]])
    a, b, c = np.linalg.solve(m, [1.0, 0.0, 0.0])
    return c * rho if rho < r else a * rho + b / rho


def chi_annulus(rho, r=R_IN):
    return math.log(rho) / math.log(r)


def mirrored(half, axis_x):
    """Glue ``half`` to its reflection about ``x = axis_x``; inclusion m of the copy becomes m + M."""
    v = half.vertices
    seam = np.flatnonzero(np.isclose(v[:, 0], axis_x, atol=1e-13, rtol=0))
    others = np.setdiff1d(np.arange(len(v)), seam)
    new_index = np.empty(len(v), dtype=np.int64)
    new_index[seam] = seam
    new_index[others] = len(v) + np.arange(len(others))
    copy = v[others].copy()
    copy[:, 0] = 2 * axis_x - copy[:, 0]
    vertices = np.vstack([v, copy])
    tri_copy = new_index[half.triangles][:, [0, 2, 1]]
    tags_copy = np.where(half.tags > 0, half.tags + half.n_inclusions, 0)
    triangles = np.vstack([half.triangles, tri_copy])
    tags = np.concatenate([half.tags, tags_copy])
    edges, etags = hmesh._boundary_edges(triangles, tags)
    mesh = hmesh.Mesh(vertices, triangles, tags, edges, etags)
    hmesh.check_topology(mesh)
    return mesh


@pytest.fixture(scope="session")
def mirror_squares():
    """[0,2]x[0,1] with squares [0.3,0.7]^2 and its mirror image, exactly symmetric about x = 1."""
    half = hmesh.generate(hmesh.rectangle(0, 0, 1, 1), [hmesh.rectangle(0.3, 0.3, 0.7, 0.7)], 0.05)
    return mirrored(half, 1.0)


@pytest.fixture(scope="session")
def mirror_disks():
    """[0,2]x[0,1] with disks of radius 1/4 at (0.5, 0.5) and (1.5, 0.5), exactly mirror symmetric."""
    half = hmesh.generate(hmesh.rectangle(0, 0, 1, 1), [disk(0.5, 0.5, 0.25)], 0.05)
    return mirrored(half, 1.0)


ACCEPTANCE_LINES: list = []
"""PASS/FAIL lines recorded by the acceptance suite, echoed in the terminal summary."""


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
