"""Exception hierarchy shared by all thermogeo modules."""


class ThermogeoError(Exception):
    """Base class for every error raised by this package."""


class SolverError(ThermogeoError):
    """A numerical procedure could not produce a result (CLI exit code 2)."""


class InputError(ThermogeoError, ValueError):
    """Inputs violate an operation's preconditions (CLI exit code 3)."""


# geometry
class SingularMetric(InputError):
    pass


class StencilOutOfBounds(InputError):
    pass


class ChartMismatch(InputError):
    pass


class DimensionMismatch(InputError):
    pass


# thermal metric
class DegenerateFrame(InputError):
    pass


class QuadratureFailure(SolverError):
    pass


# stress-free classification
class DegenerateCone(InputError):
    pass


class NonMonotoneTemperature(InputError):
    pass


class OriginInDomain(InputError):
    pass


# embedding
class NotEmbeddable(SolverError):
    def __init__(self, message: str, radius: float | None = None):
        super().__init__(message)
        self.radius = radius


# equilibrium
class ShootingDivergence(SolverError):
    pass


class NonPositiveRadius(SolverError):
    pass


class SingularF(InputError):
    pass


# linearized theory
class SingularSystem(SolverError):
    pass


class NonDifferentiable(SolverError):
    pass


# scenario files
class ParseError(InputError):
    pass


class ValidationError(InputError):
    pass
