"""Scenario files, contrast sweeps and CSV/JSON reports.

A scenario is a flat ``key = value`` text file; ``#`` starts a comment.
Recognised keys (defaults in brackets)::

    mode              = high | low | mixed
    geometry.domain   = disk cx cy r | rect x0 y0 x1 y1 | polygon x1 y1 x2 y2 ...
    geometry.segments = sides used to approximate disks                  [64]
    inclusion.N.shape = same shape syntax as geometry.domain, N = 1, 2, ...
    inclusion.N.role  = high | low       [the mode, for high and low modes]
    mesh.h            = target element diameter                          [0.05]
    forcing.dN        = constant f on subdomain N (d0 is the background) [0]
    boundary.g        = g0 g1 g2, meaning g(x, y) = g0 + g1 x + g2 y     [0 0 0]
    sweep.eta         = contrasts for high and mixed modes               [1e2 1e3 1e4 1e5]
    sweep.epsilon     = contrasts for low mode                           [1e-2 1e-3 1e-4 1e-5]
    expansion.order   = highest term index I                             [8]
    output.dir        = report directory                                 [out]
    solver.tol        = relative residual tolerance                      [1e-12]
    solver.method     = direct | cg                                      [direct]
    name              = free-form label copied into the summary          [scenario]

List values accept commas or whitespace as separators.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .basis import build_basis
from .errors import ConfigError, HiContrastError
from .expansion import Expansion
from .fem import DEFAULT_TOL, PiecewiseData, Subdomains, h1_norm
from .high import HighScenario, expand_high
from .low import LowScenario, expand_low
from .mesh import Mesh, generate, rectangle, regular_polygon
from .mixed import MixedScenario, expand_mixed, mixed_basis
from .reference import ContrastCoefficient, expansion_error, solve_direct

MODES = ("high", "low", "mixed")
ROLES = ("high", "low")
SHAPES = {"disk": 3, "rect": 4}
DEFAULT_H = 0.05
DEFAULT_ORDER = 8
DEFAULT_SEGMENTS = 64
DEFAULT_SWEEP = {"high": (1e2, 1e3, 1e4, 1e5), "mixed": (1e2, 1e3, 1e4, 1e5), "low": (1e-2, 1e-3, 1e-4, 1e-5)}
CSV_COLUMNS = ("eta", "I", "h1_error", "l2_error", "ratio", "u_norm", "runtime_ms")
FLOOR_FACTOR = 10.0


@dataclass(frozen=True)
class Shape:
    kind: str
    params: tuple

    def polygon(self, segments: int = DEFAULT_SEGMENTS) -> np.ndarray:
        p = self.params
        if self.kind == "disk":
            return regular_polygon((p[0], p[1]), p[2], segments)
        if self.kind == "rect":
            return rectangle(*p)
        return np.asarray(p, dtype=float).reshape(-1, 2)

    def text(self) -> str:
        return " ".join([self.kind, *(repr(float(v)) for v in self.params)])


@dataclass(frozen=True)
class InclusionSpec:
    shape: Shape
    role: str


@dataclass(frozen=True)
class Scenario:
    mode: str
    domain: Shape
    inclusions: tuple = ()
    h: float = DEFAULT_H
    forcing: tuple = (0.0,)
    g: tuple = (0.0, 0.0, 0.0)
    order: int = DEFAULT_ORDER
    sweep: tuple = ()
    output_dir: str = "out"
    tol: float = DEFAULT_TOL
    method: str = "direct"
    segments: int = DEFAULT_SEGMENTS
    name: str = "scenario"

    @property
    def data(self) -> PiecewiseData:
        return PiecewiseData(self.forcing, self.g)

    @property
    def roles(self) -> dict:
        return {m: inc.role for m, inc in enumerate(self.inclusions, start=1)}

    @property
    def contrast_name(self) -> str:
        return "epsilon" if self.mode == "low" else "eta"

    def small(self, contrast: float) -> float:
        """Expansion parameter for a sweep value: ``1/eta`` or ``eps``."""
        return contrast if self.mode == "low" else 1.0 / contrast

    def coefficient(self, contrast: float) -> ContrastCoefficient:
        if self.mode == "high":
            return ContrastCoefficient.high(len(self.inclusions), contrast)
        if self.mode == "low":
            return ContrastCoefficient.low(len(self.inclusions), contrast)
        return ContrastCoefficient.mixed(self.roles, contrast)

    def with_overrides(self, *, order=None, h=None, tol=None, output_dir=None) -> "Scenario":
        """Copy with command-line overrides applied and validated."""
        errors = []
        if order is not None and order < 0:
            errors.append(("expansion.order", "must be >= 0"))
        if h is not None and not h > 0:
            errors.append(("mesh.h", "must be positive"))
        if tol is not None and not tol > 0:
            errors.append(("solver.tol", "must be positive"))
        _raise(errors)
        changes = {k: v for k, v in dict(order=order, h=h, tol=tol, output_dir=output_dir).items() if v is not None}
        return replace(self, **changes)


def _raise(errors):
    if errors:
        field_, message = errors[0]
        raise ConfigError(field_, message, errors)


def _numbers(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(",", " ").split()]


def _parse_shape(text: str) -> Shape:
    parts = text.split(None, 1)
    if not parts:
        raise ValueError("empty shape")
    kind = parts[0].lower()
    values = _numbers(parts[1]) if len(parts) > 1 else []
    if not all(math.isfinite(v) for v in values):
        raise ValueError("coordinates must be finite")
    if kind in SHAPES:
        if len(values) != SHAPES[kind]:
            raise ValueError(f"{kind} takes {SHAPES[kind]} numbers")
        if kind == "disk" and not values[2] > 0:
            raise ValueError("disk radius must be positive")
        if kind == "rect" and not (values[2] > values[0] and values[3] > values[1]):
            raise ValueError("rect needs x0 < x1 and y0 < y1")
    elif kind == "polygon":
        if len(values) < 6 or len(values) % 2:
            raise ValueError("polygon needs at least three x y pairs")
    else:
        raise ValueError(f"unknown shape {kind!r} (disk, rect, polygon)")
    return Shape(kind, tuple(values))


def _read_pairs(text: str, errors: list) -> dict:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append((f"line {lineno}", "expected 'key = value'"))
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if key in pairs:
            errors.append((key, f"duplicate key (line {lineno})"))
        pairs[key] = value
    return pairs


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario file.

    Every invalid field is collected; the raised :class:`ConfigError` names the
    first one and carries the full list in ``errors``.
    """
    errors: list = []
    pairs = _read_pairs(text, errors)
    used = set()

    def take(key, convert, default):
        if key not in pairs:
            return default
        used.add(key)
        try:
            return convert(pairs[key])
        except ValueError as exc:
            errors.append((key, str(exc) or "invalid value"))
            return default

    mode = take("mode", lambda s: s.lower(), None)
    if mode is None:
        errors.append(("mode", "missing (high, low or mixed)"))
    elif mode not in MODES:
        errors.append(("mode", f"unknown mode {mode!r}"))
        mode = None

    domain = take("geometry.domain", _parse_shape, None)
    if domain is None and "geometry.domain" not in pairs:
        errors.append(("geometry.domain", "missing"))
    segments = take("geometry.segments", int, DEFAULT_SEGMENTS)
    if segments < 3:
        errors.append(("geometry.segments", "need at least 3"))

    indices = set()
    for key in pairs:
        parts = key.split(".")
        if parts[0] == "inclusion":
            if len(parts) == 3 and parts[1].isdigit() and int(parts[1]) >= 1 and parts[2] in ("shape", "role"):
                indices.add(int(parts[1]))
            else:
                errors.append((key, "expected inclusion.N.shape or inclusion.N.role with N >= 1"))
                used.add(key)
    if indices and sorted(indices) != list(range(1, max(indices) + 1)):
        errors.append(("inclusion", "inclusions must be numbered 1..M without gaps"))
    inclusions = []
    for n in sorted(indices):
        shape = take(f"inclusion.{n}.shape", _parse_shape, None)
        if shape is None and f"inclusion.{n}.shape" not in pairs:
            errors.append((f"inclusion.{n}.shape", "missing"))
        default_role = mode if mode in ROLES else None
        role = take(f"inclusion.{n}.role", lambda s: s.lower(), default_role)
        if role is None:
            errors.append((f"inclusion.{n}.role", "required in mixed mode"))
        elif role not in ROLES:
            errors.append((f"inclusion.{n}.role", f"unknown role {role!r}"))
        elif mode in ROLES and role != mode:
            errors.append((f"inclusion.{n}.role", f"role {role!r} inconsistent with mode {mode!r}"))
        inclusions.append(InclusionSpec(shape, role))
    n_inc = len(inclusions)
    if mode in ROLES and n_inc == 0:
        errors.append(("inclusion", "at least one inclusion is required"))
    if mode == "mixed" and len({inc.role for inc in inclusions} & set(ROLES)) < 2:
        errors.append(("mode", "mode requires two inclusions with distinct roles"))

    h = take("mesh.h", float, DEFAULT_H)
    if not (math.isfinite(h) and h > 0):
        errors.append(("mesh.h", "must be positive"))

    forcing = [0.0] * (n_inc + 1)
    for key in pairs:
        if key.startswith("forcing."):
            used.add(key)
            suffix = key[len("forcing."):]
            if not (suffix.startswith("d") and suffix[1:].isdigit()):
                errors.append((key, "expected forcing.dN"))
                continue
            m = int(suffix[1:])
            if m > n_inc:
                errors.append((key, f"no subdomain {m}"))
                continue
            try:
                forcing[m] = float(pairs[key])
            except ValueError:
                errors.append((key, "not a number"))
    if not all(math.isfinite(v) for v in forcing):
        errors.append(("forcing", "values must be finite"))

    g = take("boundary.g", _numbers, [0.0, 0.0, 0.0])
    if len(g) != 3 or not all(math.isfinite(v) for v in g):
        errors.append(("boundary.g", "expected three finite affine coefficients g0 g1 g2"))

    sweep_key = "sweep.epsilon" if mode == "low" else "sweep.eta"
    other_key = "sweep.eta" if mode == "low" else "sweep.epsilon"
    if mode is not None and other_key in pairs:
        used.add(other_key)
        errors.append((other_key, f"not used in {mode} mode; use {sweep_key}"))
    sweep = take(sweep_key, _numbers, list(DEFAULT_SWEEP.get(mode, ())))
    if mode is not None and not sweep:
        errors.append((sweep_key, "empty sweep"))
    if not all(math.isfinite(v) and v > 0 for v in sweep):
        errors.append((sweep_key, "sweep values must be positive"))
    if len(set(sweep)) != len(sweep):
        errors.append((sweep_key, "duplicate sweep values"))

    order = take("expansion.order", int, DEFAULT_ORDER)
    if order < 0:
        errors.append(("expansion.order", "must be >= 0"))
    output_dir = take("output.dir", str, "out")
    tol = take("solver.tol", float, DEFAULT_TOL)
    if not (math.isfinite(tol) and tol > 0):
        errors.append(("solver.tol", "must be positive"))
    method = take("solver.method", lambda s: s.lower(), "direct")
    if method not in ("direct", "cg"):
        errors.append(("solver.method", "expected direct or cg"))
    name = take("name", str, "scenario")

    for key in sorted(set(pairs) - used - {f"inclusion.{n}.{k}" for n in indices for k in ("shape", "role")}):
        errors.append((key, "unknown key"))

    _raise(errors)
    return Scenario(
        mode=mode,
        domain=domain,
        inclusions=tuple(inclusions),
        h=h,
        forcing=tuple(forcing),
        g=tuple(g),
        order=order,
        sweep=tuple(sorted(sweep)),
        output_dir=output_dir,
        tol=tol,
        method=method,
        segments=segments,
        name=name,
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("path", f"cannot read {path}: {exc.strerror}") from None
    return parse_scenario(text)


def build_mesh(scenario: Scenario) -> Mesh:
    return generate(
        scenario.domain.polygon(scenario.segments),
        [inc.shape.polygon(scenario.segments) for inc in scenario.inclusions],
        scenario.h,
    )


def build_expansion(scenario: Scenario, mesh: Mesh | None = None, sub: Subdomains | None = None) -> Expansion:
    """All terms up to ``scenario.order`` (contrast independent)."""
    mesh = mesh if mesh is not None else build_mesh(scenario)
    sub = sub or Subdomains(mesh, method=scenario.method, tol=scenario.tol)
    if scenario.mode == "high":
        exp = expand_high(HighScenario(mesh, scenario.data, scenario.order), build_basis(sub))
    elif scenario.mode == "low":
        exp = expand_low(LowScenario(mesh, scenario.data, scenario.order), sub)
    else:
        mixed = MixedScenario(mesh, scenario.roles, scenario.data, scenario.order)
        exp = expand_mixed(mixed, mixed_basis(mixed, sub))
    return replace(exp, metadata={**exp.metadata, "scenario": scenario.name, "h": repr(scenario.h)})


@dataclass(frozen=True)
class StudyRow:
    """One (contrast, I) cell: ``eta`` holds the sweep value (``eps`` in low mode)."""

    eta: float
    I: int
    h1_error: float
    l2_error: float
    ratio: float
    u_norm: float
    runtime_ms: float

    def __post_init__(self):
        if self.h1_error < 0 or self.l2_error < 0:
            raise ValueError("errors must be non-negative")


@dataclass
class Study:
    rows: list
    summary: dict = field(default_factory=dict)


def _ms(t0: float, timing: bool) -> float:
    return round((time.perf_counter() - t0) * 1e3, 3) if timing else 0.0


def estimate_constant(rows, mode: str) -> dict:
    """Median-ratio estimate of the convergence constant.

    For each consecutive pair ``I, I+1`` at one contrast whose errors both
    exceed ``FLOOR_FACTOR`` times the floor, the per-step constant is
    ``err(I+1) / (s err(I))`` with ``s = 1/eta`` (high, mixed) or ``eps``
    (low).  The floor is the error at the largest ``I`` for the most extreme
    contrast.
    """
    if not rows:
        return {"C_hat": math.nan, "C_hat_by_contrast": {}, "floor": math.nan, "min_error": math.nan, "pairs": 0}
    extreme = min(r.eta for r in rows) if mode == "low" else max(r.eta for r in rows)
    at_extreme = [r for r in rows if r.eta == extreme]
    floor = max(at_extreme, key=lambda r: r.I).h1_error
    threshold = FLOOR_FACTOR * floor
    by_contrast: dict = {}
    for r in rows:
        by_contrast.setdefault(r.eta, {})[r.I] = r.h1_error
    logs_all, per = [], {}
    for eta in sorted(by_contrast):
        errs = by_contrast[eta]
        s = eta if mode == "low" else 1.0 / eta
        logs = [
            math.log(errs[i + 1] / (s * errs[i]))
            for i in sorted(errs)
            if i + 1 in errs and errs[i] > threshold and errs[i + 1] > threshold
        ]
        per[repr(eta)] = math.exp(float(np.median(logs))) if logs else math.nan
        logs_all += logs
    return {
        "C_hat": math.exp(float(np.median(logs_all))) if logs_all else math.nan,
        "C_hat_by_contrast": per,
        "floor": floor,
        "min_error": min(r.h1_error for r in rows),
        "pairs": len(logs_all),
    }


def run_study(scenario: Scenario, *, threads: int = 1, timing: bool = True, mesh: Mesh | None = None) -> Study:
    """Compare partial sums ``I = 0..order`` against direct solves for every sweep value.

    Direct solves run on ``threads`` worker threads; rows are aggregated in
    sweep order so the output does not depend on scheduling.  A failing
    direct solve drops the rows of that contrast and is listed under
    ``failures`` in the summary.
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    mesh = mesh if mesh is not None else build_mesh(scenario)
    t0 = time.perf_counter()
    expansion = build_expansion(scenario, mesh)
    expansion_ms = _ms(t0, timing)

    def direct(contrast):
        t = time.perf_counter()
        try:
            u, _ = solve_direct(mesh, scenario.coefficient(contrast), scenario.data, method=scenario.method, tol=scenario.tol)
        except HiContrastError as exc:
            return None, f"{type(exc).__name__}: {exc}", _ms(t, timing)
        return u, None, _ms(t, timing)

    sweep = sorted(scenario.sweep)
    if threads == 1:
        results = [direct(c) for c in sweep]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(direct, sweep))

    rows, failures = [], []
    for contrast, (u, failure, _) in zip(sweep, results):
        if u is None:
            failures.append({"contrast": contrast, "error": failure})
            continue
        u_norm = h1_norm(u)
        previous = math.nan
        for order in range(scenario.order + 1):
            t = time.perf_counter()
            h1, l2 = expansion_error(u, expansion.partial_sum(scenario.small(contrast), order))
            ratio = h1 / previous if previous > 0 else math.nan
            rows.append(StudyRow(contrast, order, h1, l2, ratio, u_norm, _ms(t, timing)))
            previous = h1
    summary = {
        "scenario": scenario.name,
        "mode": scenario.mode,
        "contrast": scenario.contrast_name,
        "sweep": list(sweep),
        "order": scenario.order,
        "h": scenario.h,
        "n_vertices": mesh.n_vertices,
        "n_triangles": len(mesh.triangles),
        "compatibility_defect_max": max(expansion.defects(), default=0.0),
        "failures": failures,
        "expansion_ms": expansion_ms,
        "direct_ms": [r[2] for r in results],
        **estimate_constant(rows, scenario.mode),
    }
    return Study(sorted(rows, key=lambda r: (r.eta, r.I)), summary)


def format_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in sorted(rows, key=lambda r: (r.eta, r.I)):
        writer.writerow([repr(float(r.eta)), int(r.I), *(repr(float(getattr(r, c))) for c in CSV_COLUMNS[2:])])
    return buf.getvalue()


def parse_csv(text: str) -> list[StudyRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if tuple(header or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {header!r}")
    return [StudyRow(float(r[0]), int(r[1]), *(float(v) for v in r[2:])) for r in reader if r]


def _write(path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from None
    return path


def emit_csv(rows, path) -> Path:
    return _write(path, format_csv(rows))


def read_csv(path) -> list[StudyRow]:
    return parse_csv(Path(path).read_text())


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.generic):
        return _json_safe(value.item())
    return value


def emit_summary(summary: dict, path) -> Path:
    """JSON with sorted keys; non-finite numbers become ``null``."""
    return _write(path, json.dumps(_json_safe(summary), indent=2, sort_keys=True) + "\n")

