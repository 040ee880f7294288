"""Exception types raised across the package."""


class AmpSureError(Exception):
    """Base class for all package errors."""


class ShapeError(AmpSureError, ValueError):
    pass


class ParameterError(AmpSureError, ValueError):
    pass


class SizeError(AmpSureError, MemoryError):
    pass


class FormatError(AmpSureError, ValueError):
    pass


class SigmaRangeError(AmpSureError, ValueError):
    """Noise level outside the range a denoiser was built for."""


class CapabilityError(AmpSureError, TypeError):
    pass


class DivergenceError(AmpSureError, ArithmeticError):
    """Non-finite values appeared inside a D-AMP run."""

    def __init__(self, iteration, message=None):
        self.iteration = iteration
        super().__init__(message or f"D-AMP diverged at iteration {iteration}")


class DegenerateSigmaError(AmpSureError, ValueError):
    pass


class CurationError(AmpSureError, ValueError):
    pass


class TrainingDivergenceError(AmpSureError, ArithmeticError):
    def __init__(self, epoch, message=None):
        self.epoch = epoch
        super().__init__(message or f"training loss became non-finite at epoch {epoch}")


class ConfigError(AmpSureError, ValueError):
    pass
