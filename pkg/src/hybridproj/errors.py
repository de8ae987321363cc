"""Exception hierarchy shared by every module of the package."""


class HybridProjError(Exception):
    """Base class for all package errors."""


class DimensionError(HybridProjError, ValueError):
    """A point does not conform to the dimension of its geometry."""


class GeometryMismatch(HybridProjError, ValueError):
    """An operation requires a different exponent than the one supplied."""


class InfeasibleRegion(HybridProjError):
    """No point satisfies all region constraints within tolerance."""

    def __init__(self, message, violation=None):
        super().__init__(message)
        self.violation = violation


class NonConvergence(HybridProjError):
    """An inner solver exhausted its iteration budget.

    The best iterate and its residual are attached so callers can decide
    whether to accept it.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class DomainViolation(HybridProjError, ValueError):
    """A point lies outside the domain of an operator."""


class EmptyLevelSet(HybridProjError):
    """Sampling found no point of a sublevel set of the residual."""

    def __init__(self, message, min_residual=None, bound=None):
        super().__init__(message)
        self.min_residual = min_residual
        self.bound = bound


class DegenerateHalfSpace(HybridProjError):
    """A half-space with zero normal, i.e. the whole space."""


class SchemeError(HybridProjError):
    """A step of an iterative scheme failed; wraps the underlying error."""

    def __init__(self, message, iteration=None, cause=None):
        super().__init__(message)
        self.iteration = iteration
        self.cause = cause


class ConfigError(HybridProjError, ValueError):
    """Base class for configuration problems."""


class SchemaError(ConfigError):
    """A configuration document violates the JSON schema.

    ``pointer`` is the JSON pointer of the offending element.
    """

    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class SemanticError(ConfigError):
    """A schema-valid configuration that is mathematically inadmissible."""
