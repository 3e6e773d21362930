"""Exception hierarchy shared by all holoee modules."""


class HoloError(Exception):
    """Base class for every error raised by holoee."""


class ValidationError(HoloError, ValueError):
    """An object violates the invariants of its type."""


class ContractionError(HoloError):
    """A tensor-network contraction annihilated the state.

    ``link`` carries the offending link (or qubit pair) when known.
    """

    def __init__(self, message, link=None):
        super().__init__(message)
        self.link = link


class UnsupportedScaleError(HoloError):
    """The requested problem exceeds a desk-scale cap."""


class ConfigError(HoloError, ValueError):
    """Invalid or incomplete configuration."""


class CompensationError(HoloError):
    """Decoherence compensation produced a non-normalizable matrix."""
