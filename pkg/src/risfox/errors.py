"""Exception hierarchy shared by all modules."""


class RisFoxError(Exception):
    """Base class for library errors."""


class PoleError(RisFoxError, ValueError):
    """Gamma function evaluated at a non-positive integer."""


class NoAdmissibleContourError(RisFoxError, ValueError):
    """The pole families of a Mellin-Barnes integrand overlap."""


class NonConvergentIntegralError(RisFoxError, ArithmeticError):
    """Node doubling or truncation did not reach the requested tolerance."""


class DimensionLimitError(RisFoxError, ValueError):
    """A multivariate evaluation exceeds the configured dimension limit."""


class TruncationError(RisFoxError, ArithmeticError):
    """A series was cut before its tail fell under the stopping threshold."""


class StripError(RisFoxError, ValueError):
    """A moment order lies outside the convergence strip."""


class DomainError(RisFoxError, ValueError):
    """Argument outside the support of a distribution."""


class QuadratureError(RisFoxError, ArithmeticError):
    """Adaptive quadrature failed to converge."""


class ConfigError(RisFoxError, ValueError):
    """Invalid scenario or experiment configuration.

    ``line`` and ``field`` locate the offending entry when known.
    """

    def __init__(self, message, *, line=None, field=None):
        self.message = message
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
