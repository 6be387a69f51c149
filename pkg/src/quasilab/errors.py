"""Exception types shared across the package."""


class QuasilabError(Exception):
    """Base class for all quasilab errors."""


class PreconditionError(QuasilabError):
    """An operation was called with inputs violating its contract."""


class AlgebraMismatchError(PreconditionError):
    """Two values from different algebra declarations were combined."""


class SignUndecidableError(QuasilabError):
    """The sign of a value could not be decided within the precision cap.

    Raised instead of silently picking a side when a comparison lands
    inside the numeric guard band and no exact descriptor is available.
    """


class SearchExhaustedError(QuasilabError):
    """A bounded deterministic search ended without a witness.

    Distinct from nonexistence: a larger bound may still succeed.
    """
