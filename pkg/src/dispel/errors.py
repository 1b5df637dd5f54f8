"""Exception taxonomy shared across the toolkit.

The CLI maps these onto exit codes: configuration/schema problems -> 2,
numeric/convergence failures -> 3, I/O problems -> 4 (plain OSError).
"""


class DispelError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(DispelError):
    """Invalid configuration, arguments, or input-file schema."""


class SchemaError(ConfigError):
    """A structured text file violates its declared schema."""


class ParameterError(ConfigError):
    """A physical parameter is outside its valid domain."""


class KindError(ConfigError):
    """A layer of the wrong kind was passed (wire vs via vs meol)."""


class DecompositionError(ConfigError):
    """Cell dimensions do not decompose into the contacted gate pitch."""


class DrcError(ConfigError):
    """Relaxed design-rule check failed (same-layer shapes touch/overlap)."""


class CapacityError(ConfigError):
    """Placement cannot fit the cells at the requested utilization."""


class NumericError(DispelError):
    """Base class for numeric/convergence failures."""


class ConvergenceError(NumericError):
    """An iterative solve did not converge within its iteration budget."""


class FitError(NumericError):
    """Parameter extraction failed (degenerate or insufficient data)."""


class DomainError(NumericError):
    """A formula was evaluated outside its mathematical domain."""


class CharacterizationError(NumericError):
    """A transient characterization run did not settle."""

    def __init__(self, arc, message):
        self.arc = arc
        super().__init__(f"arc {arc}: {message}")


class FeatureError(DispelError):
    """A required gate or feature is missing from a library/dataset."""
