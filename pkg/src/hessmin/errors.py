"""Exception hierarchy shared by all hessmin modules."""


class HessminError(Exception):
    """Base class for all package-specific errors."""


class InvalidArg(HessminError):
    """An argument violates a documented precondition."""


class RejectedGeometry(HessminError):
    """Mesh construction produced no interior nodes."""


class RegionOutOfRange(HessminError):
    """A requested ball or annulus leaves the interior zone."""


class NonFiniteEnergy(HessminError):
    """A non-finite intermediate appeared while evaluating the energy."""


class DegenerateModel(HessminError):
    """Derivative-based operation requested for p != 2 with eps = 0."""


class UnsupportedTestFunction(HessminError):
    """Test function does not vanish on BAND and EXTERIOR nodes."""


class LineSearchStall(HessminError):
    """No decreasing step of at least the minimum size exists."""


class TooLarge(HessminError):
    """Unknown count exceeds the dense-factorization cap."""


class SingularSystem(HessminError):
    """Dense factorization of the oracle system failed."""


class RadiiTooFine(HessminError):
    """A profile radius is below the 3h resolution floor."""


class InsufficientData(HessminError):
    """Fewer than three positive samples available for a fit."""


class InvalidParams(HessminError):
    """Lemma-checker parameters violate their constraints."""


class NoMatchingPairs(HessminError):
    """No (tau*R, R) sample pair aligns within the matching tolerance."""


class EmptyRegion(HessminError):
    """A sampling region contains no nodes."""


class DegenerateDenominator(HessminError):
    """A ratio denominator vanished while the numerator did not."""


class ParseError(HessminError):
    """A configuration or data file is malformed."""


class ValidationError(HessminError):
    """A parsed configuration violates a module precondition."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class IoError(HessminError):
    """A file could not be read or written."""


class FormatError(HessminError):
    """A field or profile file has the wrong structure."""
