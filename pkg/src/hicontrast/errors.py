"""Exception hierarchy shared by all modules."""


class HiContrastError(Exception):
    """Base class for errors raised by this package."""


class InclusionOverlap(HiContrastError):
    """Inclusion closures intersect each other or touch the outer boundary."""


class DegenerateGeometry(HiContrastError):
    """Self-intersecting or near-zero-area polygon, or a mesh below the quality floor."""


class InvalidTopology(HiContrastError):
    """A mesh violates the subdomain/boundary tagging invariants."""


class ParseError(HiContrastError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SolverDiverged(HiContrastError):
    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)


class MissingBoundaryData(HiContrastError):
    """A Dirichlet solve was requested without data on part of the region boundary."""


class IncompatibleData(HiContrastError):
    """Neumann data violate the compatibility condition beyond the configured threshold."""

    def __init__(self, message, defect=None):
        self.defect = defect
        super().__init__(message)


class NotSPD(HiContrastError):
    """The geometry matrix failed its Cholesky factorization."""


class MeshMismatch(HiContrastError):
    """Two finite-element functions live on different meshes."""


class ConfigError(HiContrastError):
    """Invalid scenario field.  ``errors`` lists every ``(field, message)`` found."""

    def __init__(self, field, message, errors=None):
        self.field = field
        self.errors = list(errors) if errors else [(field, message)]
        super().__init__(f"{field}: {message}")
