"""Exception types raised across the package."""


class CvknitError(Exception):
    """Base class for all package errors."""


class InputError(CvknitError, ValueError):
    """Malformed or out-of-range input (bad index, bad spec file, bad argument)."""


class TruncationError(CvknitError):
    """A Fock-space truncation left more tail mass than the tolerance allows.

    ``suggested_cutoff`` carries a cutoff that should satisfy the tolerance when
    one is known.
    """

    def __init__(self, message, suggested_cutoff=None):
        super().__init__(message)
        self.suggested_cutoff = suggested_cutoff


class DegeneracyError(CvknitError):
    """A normalization constant fell below the degeneracy floor."""


class ResourceError(CvknitError):
    """The requested object would exceed the memory budget."""


class ToleranceError(CvknitError):
    """A numerical check failed its tolerance."""
