"""Exception types raised across the package."""


class SluFstError(Exception):
    """Base class for all package errors."""


class ConfigError(SluFstError):
    """Incompatible inputs, e.g. mismatched symbol tables or bad parameters."""


class BuildError(SluFstError):
    """A dialog specification or vocabulary could not be compiled."""


class InputError(SluFstError):
    """Bad runtime input: unknown labels, unreadable files, foreign characters."""


class InvariantError(RuntimeError):
    """An internal consistency check failed. This always indicates a bug."""
