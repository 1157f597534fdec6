"""Exception types shared across the package."""


class SawsimError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(SawsimError, ValueError):
    """Invalid parameters: bad qubit index, qubit count, grid spec, ..."""


class ContractError(SawsimError, ValueError):
    """An input violates a documented precondition (unsorted spectrum,
    non-orthonormal eigenvectors, broken symmetry, ...)."""


class NumericError(SawsimError, RuntimeError):
    """A numerical routine failed or produced residuals above contract."""


class ResourceError(SawsimError, MemoryError):
    """Requested problem size exceeds the dense-matrix budget."""


class RangeError(SawsimError, ValueError):
    """A curve does not span the requested crossing; widen the grid."""


class StatisticalError(SawsimError, ValueError):
    """Sample too small for the requested statistic."""


class MissingArtifactError(SawsimError, KeyError):
    """A run record does not contain the requested output artifact."""
