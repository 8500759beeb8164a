"""Exception types shared across the package."""


class SblKitError(Exception):
    """Base class for all package errors."""


class ParameterError(SblKitError, ValueError):
    """An argument is outside its valid domain."""


class DegenerateSignalError(ParameterError):
    """The noiseless measurement is identically zero, so SNR is undefined."""


class NumericError(SblKitError, ArithmeticError):
    """Non-finite values appeared in inputs or iterates."""

    def __init__(self, message, iteration=None):
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)
        self.iteration = iteration


class ConfigError(SblKitError):
    """Invalid experiment configuration."""
