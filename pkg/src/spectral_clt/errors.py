"""Exception hierarchy shared by all modules."""


class SpectralError(Exception):
    """Base class for every error raised by the package."""


class ModelError(SpectralError, ValueError):
    """Invalid spiked population model."""


class NotASpike(ModelError):
    pass


class InvalidSpike(ModelError):
    pass


class TooManySpikes(ModelError):
    pass


class DuplicateSpike(ModelError):
    pass


class DomainError(SpectralError, ValueError):
    """An input lies outside the region where a quantity is defined."""


class SingularMatrix(DomainError):
    pass


class NumericalError(SpectralError, ArithmeticError):
    """A numerical routine failed to produce a trustworthy answer."""


class SolverFailure(NumericalError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ContourError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass
