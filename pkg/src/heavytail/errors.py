"""Exception hierarchy shared by all analysis modules."""


class HeavyTailError(Exception):
    """Base class for every error raised by the package."""


class InputError(HeavyTailError):
    """Problems with the data handed to the toolkit."""


class SchemaError(InputError):
    pass


class EmptyInputError(InputError):
    pass


class ComputationError(HeavyTailError):
    """A numerical operation could not produce a meaningful result."""


class ZeroVarianceError(ComputationError):
    pass


class DomainError(ComputationError):
    pass


class InsufficientTailError(ComputationError):
    pass


class DivergentEstimateError(ComputationError):
    pass


class RangeError(ComputationError):
    pass


class ConfigError(HeavyTailError):
    pass


class InfeasibleError(ComputationError):
    pass


class SolverError(ComputationError):
    pass
