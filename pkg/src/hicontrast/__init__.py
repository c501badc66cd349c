"""Contrast-asymptotic expansions for elliptic problems in binary high-contrast media.

Piecewise-linear finite elements on triangle meshes with inclusion-conforming
interfaces.  The terms of the expansion in the contrast are computed once,
independently of the contrast, and compared against direct solves.
"""

from .basis import HarmonicBasis, assemble_a_geom, build_basis, compute_chi, solve_constants
from .checks import CheckResult, run_checks
from .errors import (
    ConfigError,
    DegenerateGeometry,
    HiContrastError,
    IncompatibleData,
    InclusionOverlap,
    InvalidTopology,
    MeshMismatch,
    MissingBoundaryData,
    NotSPD,
    ParseError,
    SolverDiverged,
)
from .expansion import Expansion, load_expansion, save_expansion
from .experiments import Scenario, StudyRow, build_expansion, build_mesh, emit_csv, emit_summary, parse_scenario, read_csv, run_study
from .fem import FEFunction, PiecewiseData, SolveReport, Subdomains, h1_norm, h1_seminorm, l2_norm, weak_flux
from .high import HighScenario, c_u0_energy, c_u0_flux, compute_u0, compute_u00, evaluate, expand_high
from .low import LowScenario, compute_u0_low, compute_u_minus1, evaluate_low, expand_low
from .mesh import Mesh, SubdomainIndex, check_topology, classify, generate, rectangle, regular_polygon
from .mixed import MixedScenario, compute_mixed_u0, compute_mixed_u_minus1, evaluate_mixed, expand_mixed, mixed_basis
from .reference import ContrastCoefficient, expansion_error, solve_direct

__version__ = "0.1.0"

__all__ = [
    "CheckResult",
    "ConfigError",
    "ContrastCoefficient",
    "DegenerateGeometry",
    "Expansion",
    "FEFunction",
    "HarmonicBasis",
    "HiContrastError",
    "HighScenario",
    "InclusionOverlap",
    "IncompatibleData",
    "InvalidTopology",
    "LowScenario",
    "Mesh",
    "MeshMismatch",
    "MissingBoundaryData",
    "MixedScenario",
    "NotSPD",
    "ParseError",
    "PiecewiseData",
    "Scenario",
    "SolveReport",
    "SolverDiverged",
    "StudyRow",
    "SubdomainIndex",
    "Subdomains",
    "assemble_a_geom",
    "build_basis",
    "build_expansion",
    "build_mesh",
    "c_u0_energy",
    "c_u0_flux",
    "check_topology",
    "classify",
    "compute_chi",
    "compute_mixed_u0",
    "compute_mixed_u_minus1",
    "compute_u0",
    "compute_u00",
    "compute_u0_low",
    "compute_u_minus1",
    "emit_csv",
    "emit_summary",
    "evaluate",
    "evaluate_low",
    "evaluate_mixed",
    "expand_high",
    "expand_low",
    "expand_mixed",
    "expansion_error",
    "generate",
    "h1_norm",
    "h1_seminorm",
    "l2_norm",
    "load_expansion",
    "mixed_basis",
    "parse_scenario",
    "read_csv",
    "rectangle",
    "regular_polygon",
    "run_checks",
    "run_study",
    "save_expansion",
    "solve_constants",
    "solve_direct",
    "weak_flux",
]
