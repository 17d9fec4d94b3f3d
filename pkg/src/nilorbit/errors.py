"""Exception types shared by all nilorbit modules."""


class NilorbitError(Exception):
    """Base class for all library errors."""


class MixedFieldError(NilorbitError):
    """Arithmetic attempted between elements of distinct quadratic fields."""


class UnsupportedInputError(NilorbitError):
    """Input is valid data but outside the supported domain of an operation.

    The CLI maps this to exit code 3 (e.g. orbit tracking of a rational
    point under an irrational translation).
    """


class InvalidFixtureError(NilorbitError):
    """A fixture file or inline definition failed validation (CLI exit code 2)."""


class LatticeError(NilorbitError):
    """A lattice or sublattice construction failed (rank deficiency, bad basis,
    lift mismatch, infinite index)."""


class SearchBoundExceededError(NilorbitError):
    """An internal certified search bound was exhausted.

    For relative-order searches this signals an implementation bug, not a
    mathematical outcome; for periodic-point searches it carries the honest
    bound that was tried.
    """

    def __init__(self, message: str, bound: int):
        super().__init__(message)
        self.bound = bound


class ConsistencyError(NilorbitError):
    """An internally asserted identity failed.

    These identities are mathematically guaranteed; a failure means a bug and
    carries the offending input so it can be replayed.
    """

    def __init__(self, message: str, payload=None):
        super().__init__(message)
        self.payload = payload
