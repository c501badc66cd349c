"""Contrast-free storage of expansion terms and their serialization.

An expansion stores terms ``u_k`` for ``k = first_index .. order`` and is
evaluated as ``sum_k s**k u_k`` where ``s`` is the small parameter
(``1/eta`` for high and mixed contrast, ``eps`` for low contrast).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ParseError
from .fem import FEFunction, PiecewiseData, SolveReport, load_function, save_function
from .mesh import Mesh, load as load_mesh, save as save_mesh

MODES = ("high", "low", "mixed")


@dataclass(frozen=True, eq=False)
class Expansion:
    mesh: Mesh
    data: PiecewiseData
    mode: str
    first_index: int
    terms: tuple = ()
    constants: tuple = ()
    inclusions: tuple = ()
    neumann_reports: tuple = field(default=(), repr=False)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    @property
    def order(self) -> int:
        """Index of the last stored term."""
        return self.first_index + len(self.terms) - 1

    def term(self, k: int) -> FEFunction:
        if not self.first_index <= k <= self.order:
            raise IndexError(f"term {k} not computed (have {self.first_index}..{self.order})")
        return self.terms[k - self.first_index]

    def constants_of(self, k: int) -> np.ndarray:
        return self.constants[k - self.first_index]

    def extended(self, term: FEFunction, constants=(), reports=()) -> "Expansion":
        return replace(
            self,
            terms=self.terms + (term,),
            constants=self.constants + (np.asarray(constants, dtype=float),),
            neumann_reports=self.neumann_reports + (tuple(reports),),
        )

    def partial_sum(self, small: float, order: int | None = None) -> FEFunction:
        order = self.order if order is None else order
        if order > self.order:
            raise ValueError(f"order {order} exceeds computed order {self.order}")
        out = np.zeros(self.mesh.n_vertices)
        for k in range(self.first_index, order + 1):
            out += small**k * self.term(k).values
        return FEFunction(self.mesh, out)

    def defects(self) -> list[float]:
        """Compatibility defects of every Neumann solve performed while building."""
        return [r.compatibility_defect for step in self.neumann_reports for r in step if isinstance(r, SolveReport)]


def _index_name(k: int) -> str:
    return f"term_{k}.txt" if k >= 0 else f"term_m{-k}.txt"


def save_expansion(expansion: Expansion, directory) -> Path:
    """Write ``mesh.txt``, one ``term_<k>.txt`` per term, ``constants.csv`` and ``manifest.txt``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    (d / "mesh.txt").write_text(save_mesh(expansion.mesh))
    for k in range(expansion.first_index, expansion.order + 1):
        (d / _index_name(k)).write_text(save_function(expansion.term(k)))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", *[f"c_{m}" for m in expansion.inclusions]])
    for k in range(expansion.first_index, expansion.order + 1):
        c = expansion.constants_of(k)
        row = [repr(float(v)) for v in c] if len(c) else [""] * len(expansion.inclusions)
        w.writerow([k, *row])
    (d / "constants.csv").write_text(buf.getvalue())
    manifest = {
        "mode": expansion.mode,
        "first_index": expansion.first_index,
        "order": expansion.order,
        "inclusions": " ".join(str(m) for m in expansion.inclusions),
        "forcing": " ".join(repr(v) for v in expansion.data.forcing),
        "g": " ".join(repr(v) for v in expansion.data.g),
    }
    manifest.update({f"meta.{k}": v for k, v in expansion.metadata.items()})
    (d / "manifest.txt").write_text("".join(f"{k} = {v}\n" for k, v in manifest.items()))
    return d


def load_expansion(directory) -> Expansion:
    d = Path(directory)
    manifest = {}
    for lineno, raw in enumerate((d / "manifest.txt").read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", lineno)
        k, v = (s.strip() for s in line.split("=", 1))
        manifest[k] = v
    mesh = load_mesh((d / "mesh.txt").read_text())
    first, order = int(manifest["first_index"]), int(manifest["order"])
    inclusions = tuple(int(m) for m in manifest.get("inclusions", "").split())
    data = PiecewiseData(
        forcing=tuple(float(v) for v in manifest["forcing"].split()),
        g=tuple(float(v) for v in manifest["g"].split()),
    )
    terms = tuple(load_function((d / _index_name(k)).read_text(), mesh) for k in range(first, order + 1))
    rows = list(csv.reader(io.StringIO((d / "constants.csv").read_text())))[1:]
    constants = tuple(np.array([float(v) for v in row[1:] if v != ""]) for row in rows)
    meta = {k[5:]: v for k, v in manifest.items() if k.startswith("meta.")}
    return Expansion(mesh, data, manifest["mode"], first, terms, constants, inclusions, metadata=meta)
